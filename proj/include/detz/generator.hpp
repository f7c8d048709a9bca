#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "detz/intmat.hpp"

namespace detz {

class GenerationFailure : public Error {
public:
    using Error::Error;
};

/// Seeded 64-bit generator. std::mt19937_64 output is fixed by the standard;
/// bounded draws are done here (not via std::uniform_int_distribution) so that
/// streams are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, bound), bound > 0.
    std::uint64_t below(std::uint64_t bound);

    /// Uniform in [lo, hi] (inclusive), lo <= hi.
    std::int64_t range(std::int64_t lo, std::int64_t hi);

    /// Uniform non-negative integer with at most `bits` bits.
    mpz_class bits(std::size_t bits);

    bool coin() { return (next() >> 63) != 0; }

private:
    std::mt19937_64 engine_;
};

/// Parameters of the structured benchmark family: a matrix unimodularly
/// equivalent to diag(1, ..., 1, p, ..., p) with `num_nontrivial` copies of a
/// random `factor_bits`-bit prime p and entries of about `entry_bits` bits.
struct MatGenSpec {
    std::size_t n = 0;
    std::size_t entry_bits = 1000;
    std::size_t num_nontrivial = 0;
    std::size_t factor_bits = 11;
    std::uint64_t seed = 1;

    /// Use this invariant factor instead of drawing a prime.
    std::optional<std::uint64_t> forced_factor;
    /// Fix the number of mixing rounds and skip the entry-size window check.
    std::optional<std::size_t> mixing_rounds;

    void validate() const;
};

struct GeneratedMatrix {
    IntMat matrix;
    std::uint64_t factor = 1;  // the prime used as non-trivial invariant factor
    int sign = 1;              // det = sign * factor^num_nontrivial
    std::size_t rounds = 0;
};

GeneratedMatrix gen_structured_full(const MatGenSpec& spec);

inline IntMat gen_structured(const MatGenSpec& spec) { return gen_structured_full(spec).matrix; }

/// Uniform random square matrix with entries in [lo, hi].
IntMat random_matrix(std::size_t n, std::int64_t lo, std::int64_t hi, Rng& rng);

/// Uniform random square matrix with entries of magnitude < 2^bits, random sign.
IntMat random_matrix_bits(std::size_t n, std::size_t bits, Rng& rng);

}  // namespace detz
