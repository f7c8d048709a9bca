#pragma once

// Residue-number-system kernels over small primes (< 2^22) held in doubles.
// Every product of two residues is below 2^44, so sums of up to 511 such
// products are exact in a double; all kernels block their inner dimension
// accordingly and reduce between blocks.

#include <cstdint>
#include <span>
#include <vector>

#include "detz/intmat.hpp"

namespace detz::rns {

class Basis {
public:
    Basis() = default;
    explicit Basis(std::vector<std::uint32_t> primes);

    std::size_t size() const { return primes_.size(); }
    std::uint32_t prime(std::size_t k) const { return primes_[k]; }
    double p(std::size_t k) const { return p_[k]; }
    double pinv(std::size_t k) const { return pinv_[k]; }
    const std::vector<std::uint32_t>& primes() const { return primes_; }
    const mpz_class& product() const { return product_; }

    /// x mod p_k for every k.
    std::vector<double> residues_of(const mpz_class& x) const;

private:
    std::vector<std::uint32_t> primes_;
    std::vector<double> p_, pinv_;
    mpz_class product_ = 1;
};

/// rows x cols matrix of residues, one contiguous slice per prime.
class ResidueMatrix {
public:
    ResidueMatrix() = default;
    ResidueMatrix(const Basis& basis, std::size_t rows, std::size_t cols)
        : basis_(&basis), rows_(rows), cols_(cols), data_(basis.size() * rows * cols, 0.0) {}

    const Basis& basis() const { return *basis_; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t slice_size() const { return rows_ * cols_; }

    double* slice(std::size_t k) { return data_.data() + k * slice_size(); }
    const double* slice(std::size_t k) const { return data_.data() + k * slice_size(); }

    /// Residue of entry (i, j) modulo prime k, in [0, p_k).
    double at(std::size_t k, std::size_t i, std::size_t j) const { return slice(k)[i * cols_ + j]; }

    bool is_zero() const;

private:
    const Basis* basis_ = nullptr;
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

/// Residues of the (signed) entries of a.
ResidueMatrix to_residues(const IntMat& a, const Basis& basis);

/// Symmetric reconstruction of every entry through an exact big-integer CRT.
IntMat from_residues(const ResidueMatrix& r);

ResidueMatrix identity(const Basis& basis, std::size_t n);

/// c = a * b modulo every prime; OpenMP-parallel over primes.
ResidueMatrix matmul(const ResidueMatrix& a, const ResidueMatrix& b);

/// Single-threaded reference for matmul.
ResidueMatrix matmul_serial(const ResidueMatrix& a, const ResidueMatrix& b);

/// out = (a - b) * scale_k modulo every prime (scale_k in [0, p_k)).
ResidueMatrix sub_scaled(const ResidueMatrix& a, const ResidueMatrix& b, std::span<const double> scale);

/// Inverse of a modulo each prime by Gauss-Jordan elimination. Returns false
/// (and leaves `inv` unspecified) if a is singular modulo any prime.
bool inverse(const ResidueMatrix& a, ResidueMatrix& inv);

/// Indices of the primes modulo which a is singular.
std::vector<std::size_t> singular_primes(const ResidueMatrix& a);

/// Base extension: given residues over `from` of integers x, computes the
/// residues over `to` of the representative of x mod product(from) lying in
/// [-(1/2 + 2^-30) M, (1/2 + 2^-30) M]. When |x| < M/4 the representative is
/// exactly x.
class Extender {
public:
    Extender(const Basis& from, const Basis& to);

    ResidueMatrix apply(const ResidueMatrix& x) const;
    ResidueMatrix apply_serial(const ResidueMatrix& x) const;

private:
    void apply_chunk(const ResidueMatrix& x, ResidueMatrix& y, std::size_t lo, std::size_t hi,
                     std::vector<double>& scratch) const;

    const Basis* from_;
    const Basis* to_;
    std::vector<double> cofactor_inv_;  // (M / f_j)^-1 mod f_j
    std::vector<double> table_;         // [t][j] = (M / f_j) mod t_k
    std::vector<double> m_mod_;         // M mod t_k
};

}  // namespace detz::rns
