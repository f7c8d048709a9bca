#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "detz/intmat.hpp"
#include "detz/primes.hpp"

namespace detz {

class DuplicatePrime : public Error {
public:
    using Error::Error;
};

/// Entries of a reduced modulo p, in [0, p).
std::vector<std::uint64_t> reduce_mod(const IntMat& a, std::uint64_t p);

/// det(a) mod p by Gaussian elimination over GF(p); 0 when a is singular mod p.
std::uint64_t det_mod_p(const IntMat& a, std::uint64_t p);

/// Inverse of a modulo p by Gauss-Jordan elimination, row-major in `inv`.
/// Returns false when a is singular modulo p.
bool inverse_mod_p(const IntMat& a, std::uint64_t p, std::vector<std::uint64_t>& inv);

/// det_mod_p for each prime; the OpenMP kernel parallelises across primes.
std::vector<std::uint64_t> det_mod_p_batch(const IntMat& a, std::span<const std::uint64_t> primes);

/// Single-threaded reference for det_mod_p_batch.
std::vector<std::uint64_t> det_mod_p_batch_serial(const IntMat& a, std::span<const std::uint64_t> primes);

/// Inverse of x modulo p (p prime, x != 0 mod p).
std::uint64_t inv_mod(std::uint64_t x, std::uint64_t p);

/// Representative of r mod m in (-m/2, m/2].
mpz_class symmetric_remainder(const mpz_class& r, const mpz_class& m);

class CrtAccumulator;
/// Combine two accumulators over disjoint prime sets.
CrtAccumulator crt_merge(const CrtAccumulator& a, const CrtAccumulator& b);

/// Residue r modulo m, with m the product of the distinct primes recorded.
class CrtAccumulator {
public:
    CrtAccumulator() = default;

    /// Combine with x = rp (mod p). Throws DuplicatePrime if p was already used.
    void add(std::uint64_t p, std::uint64_t rp);

    const mpz_class& residue() const { return r_; }
    const mpz_class& modulus() const { return m_; }
    const std::vector<std::uint64_t>& primes() const { return primes_; }
    bool contains(std::uint64_t p) const;

    /// Floor of log2(modulus()), i.e. bitlen(m) - 1; -1 when empty.
    long log2_floor() const { return static_cast<long>(bitlen(m_)) - 1; }

    /// Symmetric remainder of the residue.
    mpz_class symmetric() const { return symmetric_remainder(r_, m_); }

    /// Residue and modulus restricted to the recorded primes not dividing `avoid`.
    struct View {
        mpz_class r;
        mpz_class m;
        std::vector<std::uint64_t> primes;
    };
    View coprime_view(const mpz_class& avoid) const;

private:
    friend CrtAccumulator crt_merge(const CrtAccumulator& a, const CrtAccumulator& b);

    mpz_class r_ = 0;
    mpz_class m_ = 1;
    std::vector<std::uint64_t> primes_;
};

/// True when the candidate is "stable": log2|d| + window < log2 m, checked
/// conservatively with bit lengths. A zero candidate needs log2 m > window.
bool crt_stable(const mpz_class& d, const mpz_class& m, std::size_t window);

struct CrtCandidate {
    mpz_class d;
    CrtAccumulator acc;
};

/// Early-terminating multi-modular determinant: take fresh stream primes until
/// log2 m > e or the candidate is stable with the given window.
CrtCandidate crt_det_candidate(const IntMat& a, std::size_t e, std::size_t window, PrimeStream& primes);

/// Extend acc with stream primes not dividing `avoid` until the coprime view
/// has at least `target_bits` bits. Residues are computed in batches.
void crt_extend(CrtAccumulator& acc, const IntMat& a, std::size_t target_bits, const mpz_class& avoid,
                PrimeStream& primes);

}  // namespace detz
