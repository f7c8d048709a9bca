#pragma once

#include <cstdint>
#include <utility>

#include "detz/intmat.hpp"

namespace detz {

class SingularModP : public Error {
public:
    using Error::Error;
};

class ReconstructionFailure : public Error {
public:
    using Error::Error;
};

class NoSolution : public Error {
public:
    using Error::Error;
};

/// x = y / d with d > 0 minimal: A y = d b and gcd(y_1, ..., y_n, d) = 1.
struct RationalSolution {
    IntVec y;
    mpz_class d = 1;
};

/// Solves A x = b by p-adic lifting modulo the word prime p. Lifting stops
/// early once a reconstructed candidate passes the exact check A y = d b, and
/// otherwise continues to the proven bound p^k > 2 N D (N bounds numerators,
/// D denominators).
RationalSolution solve_rational(const IntMat& a, const IntVec& b, std::uint64_t p);

/// (num, den) with den > 0, gcd(num, den) = 1, |num| <= num_bound,
/// den <= den_bound and num = r * den (mod m). Requires m > 2 num_bound den_bound.
std::pair<mpz_class, mpz_class> rational_reconstruct(const mpz_class& r, const mpz_class& m,
                                                     const mpz_class& num_bound, const mpz_class& den_bound);

}  // namespace detz
