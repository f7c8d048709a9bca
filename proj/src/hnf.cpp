#include "detz/hnf.hpp"

#include <stdexcept>

#include <omp.h>

namespace detz {

UpperTriangular::UpperTriangular(IntMat h) : h_(std::move(h))
{
    if (!h_.square())
        throw std::invalid_argument("UpperTriangular: matrix not square");
    for (std::size_t i = 0; i < n(); ++i) {
        if (h_(i, i) <= 0)
            throw std::invalid_argument("UpperTriangular: non-positive diagonal entry");
        for (std::size_t j = 0; j < i; ++j)
            if (h_(i, j) != 0)
                throw std::invalid_argument("UpperTriangular: non-zero entry below the diagonal");
    }
}

bool UpperTriangular::reduced() const
{
    for (std::size_t i = 0; i < n(); ++i)
        for (std::size_t j = i + 1; j < n(); ++j)
            if (h_(i, j) < 0 || h_(i, j) >= h_(j, j))
                return false;
    return true;
}

namespace {

// Bring every off-diagonal entry into [0, H_jj) with row operations, bottom-up
// so that the rows subtracted are already reduced. Reduced rows are mostly
// zero (every column with unit pivot is cleared), so they are kept sparse.
void reduce_off_diagonal(IntMat& h)
{
    const std::size_t n = h.rows();
    std::vector<std::vector<std::size_t>> nz(n);
    mpz_class q;
    for (std::size_t ii = n; ii-- > 0;) {
        mpz_class* row = h.row(ii);
        for (std::size_t j = ii + 1; j < n; ++j) {
            if (row[j] == 0)
                continue;
            const mpz_class* rj = h.row(j);
            mpz_fdiv_q(q.get_mpz_t(), row[j].get_mpz_t(), rj[j].get_mpz_t());
            if (q == 0)
                continue;
            mpz_submul(row[j].get_mpz_t(), q.get_mpz_t(), rj[j].get_mpz_t());
            for (std::size_t k : nz[j])
                mpz_submul(row[k].get_mpz_t(), q.get_mpz_t(), rj[k].get_mpz_t());
        }
        for (std::size_t j = ii + 1; j < n; ++j)
            if (row[j] != 0)
                nz[ii].push_back(j);
    }
}

}  // namespace

UpperTriangular modular_hnf(const IntMat& a, const mpz_class& d)
{
    if (!a.square())
        throw std::invalid_argument("modular_hnf: matrix not square");
    if (d < 1)
        throw std::invalid_argument("modular_hnf: modulus must be positive");
    const std::size_t n = a.rows();
    IntMat h(n, n);
    if (d == 1) {
        for (std::size_t i = 0; i < n; ++i)
            h(i, i) = 1;
        return UpperTriangular(std::move(h));
    }

    IntMat w(n, n);
    for (std::size_t i = 0; i < n * n; ++i)
        mpz_fdiv_r(w.entries()[i].get_mpz_t(), a.entries()[i].get_mpz_t(), d.get_mpz_t());

    std::vector<mpz_class> v(n);
    mpz_class g, s, t, ca, cb, tmp;
    for (std::size_t j = 0; j < n; ++j) {
        // The pivot row starts as d * e_j and absorbs every working row.
        for (std::size_t k = j; k < n; ++k)
            v[k] = 0;
        v[j] = d;
        std::size_t r = 0;
        for (; r < n && v[j] != 1; ++r) {
            mpz_class* wr = w.row(r);
            if (wr[j] == 0)
                continue;
            if (mpz_divisible_p(wr[j].get_mpz_t(), v[j].get_mpz_t())) {
                mpz_divexact(ca.get_mpz_t(), wr[j].get_mpz_t(), v[j].get_mpz_t());
                for (std::size_t k = j + 1; k < n; ++k) {
                    mpz_submul(wr[k].get_mpz_t(), ca.get_mpz_t(), v[k].get_mpz_t());
                    mpz_fdiv_r(wr[k].get_mpz_t(), wr[k].get_mpz_t(), d.get_mpz_t());
                }
                wr[j] = 0;
                continue;
            }
            // [v; w] <- [[s, t], [-w_j/g, v_j/g]] [v; w], determinant 1.
            mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), v[j].get_mpz_t(), wr[j].get_mpz_t());
            mpz_divexact(ca.get_mpz_t(), v[j].get_mpz_t(), g.get_mpz_t());
            mpz_divexact(cb.get_mpz_t(), wr[j].get_mpz_t(), g.get_mpz_t());
            for (std::size_t k = j + 1; k < n; ++k) {
                tmp = s * v[k];
                mpz_addmul(tmp.get_mpz_t(), t.get_mpz_t(), wr[k].get_mpz_t());
                wr[k] *= ca;
                mpz_submul(wr[k].get_mpz_t(), cb.get_mpz_t(), v[k].get_mpz_t());
                mpz_fdiv_r(wr[k].get_mpz_t(), wr[k].get_mpz_t(), d.get_mpz_t());
                mpz_fdiv_r(v[k].get_mpz_t(), tmp.get_mpz_t(), d.get_mpz_t());
            }
            v[j] = g;
            wr[j] = 0;
        }
        if (v[j] == 1 && r < n) {
            // Unit pivot: the remaining rows are independent of each other.
            const auto lo = static_cast<std::ptrdiff_t>(r), hi = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 4)
            for (std::ptrdiff_t rr = lo; rr < hi; ++rr) {
                mpz_class* wr = w.row(static_cast<std::size_t>(rr));
                if (wr[j] == 0)
                    continue;
                mpz_class q = wr[j];
                for (std::size_t k = j + 1; k < n; ++k) {
                    mpz_submul(wr[k].get_mpz_t(), q.get_mpz_t(), v[k].get_mpz_t());
                    mpz_fdiv_r(wr[k].get_mpz_t(), wr[k].get_mpz_t(), d.get_mpz_t());
                }
                wr[j] = 0;
            }
        }
        for (std::size_t k = j; k < n; ++k)
            h(j, k) = v[k];
    }
    reduce_off_diagonal(h);
    return UpperTriangular(std::move(h));
}

mpz_class det_diag(const UpperTriangular& h)
{
    mpz_class p = 1;
    for (std::size_t i = 0; i < h.n(); ++i)
        p *= h(i, i);
    return p;
}

namespace {

struct ColumnPattern {
    // For each column j, the rows i < j with H_ij != 0.
    std::vector<std::vector<std::size_t>> above;
};

ColumnPattern column_pattern(const UpperTriangular& h)
{
    ColumnPattern p;
    p.above.resize(h.n());
    for (std::size_t j = 0; j < h.n(); ++j)
        for (std::size_t i = 0; i < j; ++i)
            if (h(i, j) != 0)
                p.above[j].push_back(i);
    return p;
}

// Solves b * H = a for one row; returns false on an inexact division.
bool div_row(const mpz_class* a, mpz_class* b, const UpperTriangular& h, const ColumnPattern& pat)
{
    const std::size_t n = h.n();
    for (std::size_t j = 0; j < n; ++j) {
        mpz_class& x = b[j];
        x = a[j];
        for (std::size_t i : pat.above[j])
            mpz_submul(x.get_mpz_t(), b[i].get_mpz_t(), h(i, j).get_mpz_t());
        const mpz_class& piv = h(j, j);
        if (piv != 1) {
            if (!mpz_divisible_p(x.get_mpz_t(), piv.get_mpz_t()))
                return false;
            mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), piv.get_mpz_t());
        }
    }
    return true;
}

void check_div_shapes(const IntMat& a, const UpperTriangular& h)
{
    if (a.cols() != h.n())
        throw std::invalid_argument("div_right_triangular: dimension mismatch");
}

}  // namespace

IntMat div_right_triangular(const IntMat& a, const UpperTriangular& h)
{
    check_div_shapes(a, h);
    const ColumnPattern pat = column_pattern(h);
    IntMat b(a.rows(), a.cols());
    const auto rows = static_cast<std::ptrdiff_t>(a.rows());
    bool ok = true;
#pragma omp parallel for schedule(dynamic, 1) reduction(&& : ok)
    for (std::ptrdiff_t r = 0; r < rows; ++r)
        ok = div_row(a.row(static_cast<std::size_t>(r)), b.row(static_cast<std::size_t>(r)), h, pat) && ok;
    if (!ok)
        throw NotDivisible("div_right_triangular: row lattice not contained in the divisor's lattice");
    return b;
}

IntMat div_right_triangular_serial(const IntMat& a, const UpperTriangular& h)
{
    check_div_shapes(a, h);
    const ColumnPattern pat = column_pattern(h);
    IntMat b(a.rows(), a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        if (!div_row(a.row(r), b.row(r), h, pat))
            throw NotDivisible("div_right_triangular: row lattice not contained in the divisor's lattice");
    return b;
}

UpperTriangular hcol_matrix(const IntVec& y, const mpz_class& d)
{
    if (d < 1)
        throw std::invalid_argument("hcol_matrix: modulus must be positive");
    const std::size_t n = y.size();
    // g[i] = gcd(d, y_i, ..., y_{n-1}); cof holds, for the current suffix,
    // integers c_j with g = sum_j c_j y_j (mod d).
    std::vector<mpz_class> g(n + 1);
    g[n] = d;
    std::vector<mpz_class> cof(n, 0);
    std::vector<mpz_class> cof_next(n, 0);  // coefficients of g[i + 1]
    IntMat h(n, n);
    mpz_class s, t, k, yi;
    for (std::size_t i = n; i-- > 0;) {
        cof_next = cof;
        mpz_fdiv_r(yi.get_mpz_t(), y[i].get_mpz_t(), d.get_mpz_t());
        mpz_gcdext(g[i].get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), g[i + 1].get_mpz_t(), yi.get_mpz_t());

        // Row i: pivot g[i+1]/g[i]; pivot * y_i = k * g[i+1] is cancelled
        // by -k times the expression of g[i+1] in the later coordinates.
        mpz_divexact(h(i, i).get_mpz_t(), g[i + 1].get_mpz_t(), g[i].get_mpz_t());
        k = h(i, i) * yi;
        mpz_divexact(k.get_mpz_t(), k.get_mpz_t(), g[i + 1].get_mpz_t());
        for (std::size_t j = i + 1; j < n; ++j) {
            h(i, j) = -k * cof_next[j];
            mpz_fdiv_r(h(i, j).get_mpz_t(), h(i, j).get_mpz_t(), d.get_mpz_t());
        }

        cof[i] = t;
        for (std::size_t j = i + 1; j < n; ++j) {
            cof[j] = s * cof_next[j];
            mpz_fdiv_r(cof[j].get_mpz_t(), cof[j].get_mpz_t(), d.get_mpz_t());
        }
    }
    reduce_off_diagonal(h);
    return UpperTriangular(std::move(h));
}

}  // namespace detz
