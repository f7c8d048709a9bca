#pragma once

#include "detz/intmat.hpp"

namespace detz {

class NotDivisible : public Error {
public:
    using Error::Error;
};

/// Upper-triangular integer matrix with positive diagonal, off-diagonal
/// entries reduced into [0, H_jj) modulo the pivot of their column.
class UpperTriangular {
public:
    UpperTriangular() = default;
    /// Takes ownership of h; throws std::invalid_argument if the shape or the
    /// triangular/positivity invariants do not hold.
    explicit UpperTriangular(IntMat h);

    std::size_t n() const { return h_.rows(); }
    const mpz_class& operator()(std::size_t i, std::size_t j) const { return h_(i, j); }
    const IntMat& matrix() const { return h_; }

    /// True when every off-diagonal entry lies in [0, H_jj).
    bool reduced() const;

private:
    IntMat h_;
};

/// Row-HNF of the lattice spanned by the rows of a together with d * Z^n.
UpperTriangular modular_hnf(const IntMat& a, const mpz_class& d);

/// Product of the diagonal entries.
mpz_class det_diag(const UpperTriangular& h);

/// B with B * H = A exactly. Throws NotDivisible if some division is inexact.
/// Rows are processed in parallel.
IntMat div_right_triangular(const IntMat& a, const UpperTriangular& h);

/// Single-threaded reference for div_right_triangular.
IntMat div_right_triangular_serial(const IntMat& a, const UpperTriangular& h);

/// Row-HNF of { w in Z^n : w . y = 0 (mod d) }, for gcd(y_1, ..., y_n, d) = 1.
UpperTriangular hcol_matrix(const IntVec& y, const mpz_class& d);

}  // namespace detz
