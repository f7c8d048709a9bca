#include "detz/rns.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <omp.h>

namespace detz::rns {

namespace {

// Largest number of residue products (< 2^44 each) whose sum, added to a value
// below 2^22, stays exact in a double.
constexpr std::size_t kProductBlock = 511;
// Same for 20-bit chunks times residues (< 2^42 each).
constexpr std::size_t kChunkBlock = 2047;
constexpr unsigned kChunkBits = 20;
// Entries per cache block in the streaming kernels.
constexpr std::size_t kEntryBlock = 512;

inline double reduce(double x, double p, double pinv)
{
    const double q = std::floor(x * pinv);
    double r = std::fma(-q, p, x);
    r += r < 0 ? p : 0.0;
    r -= r >= p ? p : 0.0;
    return r;
}

void reduce_span(double* __restrict x, std::size_t len, double p, double pinv)
{
    for (std::size_t i = 0; i < len; ++i)
        x[i] = reduce(x[i], p, pinv);
}

// c[m x n] += a[m x k] * b[k x n], with leading dimensions lda, ldb, ldc.
void gemm_acc(const double* __restrict a, std::size_t lda, const double* __restrict b, std::size_t ldb,
              double* __restrict c, std::size_t ldc, std::size_t m, std::size_t k, std::size_t n)
{
    for (std::size_t i = 0; i < m; ++i) {
        double* __restrict crow = c + i * ldc;
        for (std::size_t l = 0; l < k; ++l) {
            const double av = a[i * lda + l];
            if (av == 0.0)
                continue;
            const double* __restrict brow = b + l * ldb;
            for (std::size_t j = 0; j < n; ++j)
                crow[j] += av * brow[j];
        }
    }
}

std::uint32_t mod_mpz(const mpz_class& x, std::uint32_t p)
{
    return static_cast<std::uint32_t>(mpz_fdiv_ui(x.get_mpz_t(), p));
}

std::uint64_t inv_mod_small(std::uint64_t x, std::uint64_t p)
{
    std::int64_t t = 0, nt = 1, r = static_cast<std::int64_t>(p), nr = static_cast<std::int64_t>(x % p);
    while (nr != 0) {
        std::int64_t q = r / nr;
        std::int64_t tmp = t - q * nt;
        t = nt;
        nt = tmp;
        tmp = r - q * nr;
        r = nr;
        nr = tmp;
    }
    if (r != 1)
        throw std::domain_error("rns: residue not invertible");
    return static_cast<std::uint64_t>(t < 0 ? t + static_cast<std::int64_t>(p) : t);
}

}  // namespace

Basis::Basis(std::vector<std::uint32_t> primes) : primes_(std::move(primes))
{
    for (std::uint32_t q : primes_) {
        if (q < 3 || q >= (1u << 22))
            throw std::invalid_argument("rns::Basis: primes must lie in [3, 2^22)");
        p_.push_back(static_cast<double>(q));
        pinv_.push_back(1.0 / static_cast<double>(q));
        product_ *= q;
    }
}

std::vector<double> Basis::residues_of(const mpz_class& x) const
{
    std::vector<double> out(size());
    for (std::size_t k = 0; k < size(); ++k)
        out[k] = static_cast<double>(mod_mpz(x, primes_[k]));
    return out;
}

bool ResidueMatrix::is_zero() const
{
    return std::all_of(data_.begin(), data_.end(), [](double v) { return v == 0.0; });
}

ResidueMatrix to_residues(const IntMat& a, const Basis& basis)
{
    ResidueMatrix out(basis, a.rows(), a.cols());
    const std::size_t total = a.rows() * a.cols();
    const std::size_t np = basis.size();
    if (total == 0 || np == 0)
        return out;

    std::size_t max_chunks = 1;
    for (const auto& x : a.entries())
        max_chunks = std::max<std::size_t>(max_chunks, (bitlen(x) + kChunkBits - 1) / kChunkBits);

    // table[k][l] = 2^(20 l) mod p_k
    std::vector<double> table(np * max_chunks);
    for (std::size_t k = 0; k < np; ++k) {
        const std::uint64_t p = basis.prime(k);
        std::uint64_t v = 1;
        for (std::size_t l = 0; l < max_chunks; ++l) {
            table[k * max_chunks + l] = static_cast<double>(v);
            v = (v << kChunkBits) % p;
        }
    }

    const std::size_t nblocks = (total + kEntryBlock - 1) / kEntryBlock;
#pragma omp parallel
    {
        std::vector<std::uint32_t> words(max_chunks);
        std::vector<double> chunks(max_chunks * kEntryBlock);
        std::vector<double> acc(np * kEntryBlock);
        std::vector<char> neg(kEntryBlock);
#pragma omp for schedule(static)
        for (std::size_t blk = 0; blk < nblocks; ++blk) {
            const std::size_t lo = blk * kEntryBlock;
            const std::size_t w = std::min(kEntryBlock, total - lo);
            std::fill(chunks.begin(), chunks.end(), 0.0);
            for (std::size_t e = 0; e < w; ++e) {
                const mpz_class& x = a.entries()[lo + e];
                neg[e] = mpz_sgn(x.get_mpz_t()) < 0;
                std::size_t count = 0;
                mpz_export(words.data(), &count, -1, sizeof(std::uint32_t), 0, 32 - kChunkBits, x.get_mpz_t());
                for (std::size_t l = 0; l < count; ++l)
                    chunks[l * kEntryBlock + e] = static_cast<double>(words[l]);
            }
            std::fill(acc.begin(), acc.end(), 0.0);
            for (std::size_t l0 = 0; l0 < max_chunks; l0 += kChunkBlock) {
                const std::size_t lk = std::min(kChunkBlock, max_chunks - l0);
                gemm_acc(table.data() + l0, max_chunks, chunks.data() + l0 * kEntryBlock, kEntryBlock,
                         acc.data(), kEntryBlock, np, lk, w);
                for (std::size_t k = 0; k < np; ++k)
                    reduce_span(acc.data() + k * kEntryBlock, w, basis.p(k), basis.pinv(k));
            }
            for (std::size_t k = 0; k < np; ++k) {
                double* dst = out.slice(k) + lo;
                const double* src = acc.data() + k * kEntryBlock;
                const double p = basis.p(k);
                for (std::size_t e = 0; e < w; ++e)
                    dst[e] = (neg[e] && src[e] != 0.0) ? p - src[e] : src[e];
            }
        }
    }
    return out;
}

IntMat from_residues(const ResidueMatrix& r)
{
    const Basis& b = r.basis();
    IntMat out(r.rows(), r.cols());
    const mpz_class& m = b.product();
    std::vector<mpz_class> cof(b.size());
    std::vector<std::uint64_t> cof_inv(b.size());
    for (std::size_t k = 0; k < b.size(); ++k) {
        cof[k] = m / b.prime(k);
        cof_inv[k] = inv_mod_small(mod_mpz(cof[k], b.prime(k)), b.prime(k));
    }
    mpz_class half = m >> 1;
    for (std::size_t e = 0; e < r.slice_size(); ++e) {
        mpz_class x = 0;
        for (std::size_t k = 0; k < b.size(); ++k) {
            const std::uint64_t c = static_cast<std::uint64_t>(r.slice(k)[e]) * cof_inv[k] % b.prime(k);
            mpz_addmul_ui(x.get_mpz_t(), cof[k].get_mpz_t(), c);
        }
        mpz_fdiv_r(x.get_mpz_t(), x.get_mpz_t(), m.get_mpz_t());
        if (x > half)
            x -= m;
        out.entries()[e] = x;
    }
    return out;
}

ResidueMatrix identity(const Basis& basis, std::size_t n)
{
    ResidueMatrix out(basis, n, n);
    for (std::size_t k = 0; k < basis.size(); ++k)
        for (std::size_t i = 0; i < n; ++i)
            out.slice(k)[i * n + i] = 1.0;
    return out;
}

namespace {

void matmul_one(const ResidueMatrix& a, const ResidueMatrix& b, ResidueMatrix& c, std::size_t k)
{
    const std::size_t m = a.rows(), inner = a.cols(), n = b.cols();
    const double p = a.basis().p(k), pinv = a.basis().pinv(k);
    double* cs = c.slice(k);
    std::fill(cs, cs + m * n, 0.0);
    for (std::size_t l0 = 0; l0 < inner; l0 += kProductBlock) {
        const std::size_t lk = std::min(kProductBlock, inner - l0);
        gemm_acc(a.slice(k) + l0, inner, b.slice(k) + l0 * n, n, cs, n, m, lk, n);
        reduce_span(cs, m * n, p, pinv);
    }
}

void check_compatible(const ResidueMatrix& a, const ResidueMatrix& b)
{
    if (&a.basis() != &b.basis() && a.basis().primes() != b.basis().primes())
        throw std::invalid_argument("rns: basis mismatch");
}

}  // namespace

ResidueMatrix matmul(const ResidueMatrix& a, const ResidueMatrix& b)
{
    check_compatible(a, b);
    if (a.cols() != b.rows())
        throw std::invalid_argument("rns::matmul: dimension mismatch");
    ResidueMatrix c(a.basis(), a.rows(), b.cols());
    const auto np = static_cast<std::ptrdiff_t>(a.basis().size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t k = 0; k < np; ++k)
        matmul_one(a, b, c, static_cast<std::size_t>(k));
    return c;
}

ResidueMatrix matmul_serial(const ResidueMatrix& a, const ResidueMatrix& b)
{
    check_compatible(a, b);
    if (a.cols() != b.rows())
        throw std::invalid_argument("rns::matmul: dimension mismatch");
    ResidueMatrix c(a.basis(), a.rows(), b.cols());
    for (std::size_t k = 0; k < a.basis().size(); ++k) {
        const std::uint64_t p = a.basis().prime(k);
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < b.cols(); ++j) {
                std::uint64_t s = 0;
                for (std::size_t l = 0; l < a.cols(); ++l)
                    s = (s + static_cast<std::uint64_t>(a.at(k, i, l)) * static_cast<std::uint64_t>(b.at(k, l, j))) % p;
                c.slice(k)[i * b.cols() + j] = static_cast<double>(s);
            }
    }
    return c;
}

ResidueMatrix sub_scaled(const ResidueMatrix& a, const ResidueMatrix& b, std::span<const double> scale)
{
    check_compatible(a, b);
    if (a.rows() != b.rows() || a.cols() != b.cols() || scale.size() != a.basis().size())
        throw std::invalid_argument("rns::sub_scaled: shape mismatch");
    ResidueMatrix out(a.basis(), a.rows(), a.cols());
    const std::size_t len = a.slice_size();
    for (std::size_t k = 0; k < a.basis().size(); ++k) {
        const double p = a.basis().p(k), pinv = a.basis().pinv(k), s = scale[k];
        const double* __restrict x = a.slice(k);
        const double* __restrict y = b.slice(k);
        double* __restrict z = out.slice(k);
        for (std::size_t e = 0; e < len; ++e) {
            double d = x[e] - y[e];
            d += d < 0 ? p : 0.0;
            z[e] = reduce(d * s, p, pinv);
        }
    }
    return out;
}

namespace {

// Gauss-Jordan on [a | I] modulo prime k. Returns false if singular.
bool inverse_one(const ResidueMatrix& a, ResidueMatrix* inv, std::size_t k)
{
    const std::size_t n = a.rows();
    const std::size_t w = 2 * n;
    const double p = a.basis().p(k), pinv = a.basis().pinv(k);
    const std::uint64_t pi = a.basis().prime(k);
    std::vector<double> m(n * w, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(a.slice(k) + i * n, a.slice(k) + (i + 1) * n, m.begin() + static_cast<std::ptrdiff_t>(i * w));
        m[i * w + n + i] = 1.0;
    }
    // orig[i]: the input row now stored at position i. The pivot rows used so
    // far are combinations of input rows below right_hi, so in the right block
    // only columns < n + right_hi can be non-zero in them.
    std::vector<std::size_t> orig(n);
    for (std::size_t i = 0; i < n; ++i)
        orig[i] = i;
    std::size_t right_hi = 0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && m[piv * w + c] == 0.0)
            ++piv;
        if (piv == n)
            return false;
        if (piv != c) {
            std::swap_ranges(m.begin() + static_cast<std::ptrdiff_t>(piv * w),
                             m.begin() + static_cast<std::ptrdiff_t>((piv + 1) * w),
                             m.begin() + static_cast<std::ptrdiff_t>(c * w));
            std::swap(orig[piv], orig[c]);
        }
        right_hi = std::max(right_hi, orig[c] + 1);
        double* __restrict prow = &m[c * w];
        const double pinv_c = static_cast<double>(inv_mod_small(static_cast<std::uint64_t>(prow[c]), pi));
        const std::size_t hi = n + right_hi;
        for (std::size_t j = c; j < hi; ++j)
            prow[j] = reduce(prow[j] * pinv_c, p, pinv);
        for (std::size_t i = 0; i < n; ++i) {
            if (i == c)
                continue;
            double* __restrict row = &m[i * w];
            const double f = row[c];
            if (f == 0.0)
                continue;
            for (std::size_t j = c; j < hi; ++j)
                row[j] = reduce(row[j] - f * prow[j], p, pinv);
        }
    }
    if (inv) {
        double* dst = inv->slice(k);
        for (std::size_t i = 0; i < n; ++i)
            std::copy(m.begin() + static_cast<std::ptrdiff_t>(i * w + n),
                      m.begin() + static_cast<std::ptrdiff_t>((i + 1) * w), dst + i * n);
    }
    return true;
}

}  // namespace

bool inverse(const ResidueMatrix& a, ResidueMatrix& inv)
{
    if (a.rows() != a.cols())
        throw std::invalid_argument("rns::inverse: matrix not square");
    inv = ResidueMatrix(a.basis(), a.rows(), a.cols());
    const auto np = static_cast<std::ptrdiff_t>(a.basis().size());
    bool ok = true;
#pragma omp parallel for schedule(dynamic, 1) reduction(&& : ok)
    for (std::ptrdiff_t k = 0; k < np; ++k)
        ok = inverse_one(a, &inv, static_cast<std::size_t>(k)) && ok;
    return ok;
}

std::vector<std::size_t> singular_primes(const ResidueMatrix& a)
{
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < a.basis().size(); ++k)
        if (!inverse_one(a, nullptr, k))
            out.push_back(k);
    return out;
}

Extender::Extender(const Basis& from, const Basis& to) : from_(&from), to_(&to)
{
    if (from.size() > kProductBlock)
        throw std::invalid_argument("rns::Extender: source basis too large");
    const mpz_class& m = from.product();
    cofactor_inv_.resize(from.size());
    table_.resize(to.size() * from.size());
    m_mod_.resize(to.size());
    for (std::size_t j = 0; j < from.size(); ++j) {
        mpz_class cof = m / from.prime(j);
        cofactor_inv_[j] = static_cast<double>(inv_mod_small(mod_mpz(cof, from.prime(j)), from.prime(j)));
        for (std::size_t t = 0; t < to.size(); ++t)
            table_[t * from.size() + j] = static_cast<double>(mod_mpz(cof, to.prime(t)));
    }
    for (std::size_t t = 0; t < to.size(); ++t)
        m_mod_[t] = static_cast<double>(mod_mpz(m, to.prime(t)));
}

void Extender::apply_chunk(const ResidueMatrix& x, ResidueMatrix& y, std::size_t lo, std::size_t hi,
                           std::vector<double>& scratch) const
{
    const std::size_t s = from_->size(), t = to_->size();
    const std::size_t w = hi - lo;
    scratch.assign(s * w + w + t * w, 0.0);
    double* c = scratch.data();          // [j][e]
    double* frac = c + s * w;            // [e]
    double* acc = frac + w;              // [t][e]
    for (std::size_t j = 0; j < s; ++j) {
        const double q = from_->p(j), qinv = from_->pinv(j), ci = cofactor_inv_[j];
        const double* __restrict src = x.slice(j) + lo;
        double* __restrict cj = c + j * w;
        for (std::size_t e = 0; e < w; ++e) {
            cj[e] = reduce(src[e] * ci, q, qinv);
            frac[e] += cj[e] * qinv;
        }
    }
    for (std::size_t e = 0; e < w; ++e)
        frac[e] = std::nearbyint(frac[e]);
    gemm_acc(table_.data(), s, c, w, acc, w, t, s, w);
    for (std::size_t k = 0; k < t; ++k) {
        const double p = to_->p(k), pinv = to_->pinv(k), mm = m_mod_[k];
        double* __restrict row = acc + k * w;
        double* __restrict dst = y.slice(k) + lo;
        for (std::size_t e = 0; e < w; ++e) {
            // acc < s * 2^44 and frac * mm < s * 2^22: both exact.
            dst[e] = reduce(row[e] - frac[e] * mm, p, pinv);
        }
    }
}

ResidueMatrix Extender::apply(const ResidueMatrix& x) const
{
    if (x.basis().primes() != from_->primes())
        throw std::invalid_argument("rns::Extender: input basis mismatch");
    ResidueMatrix y(*to_, x.rows(), x.cols());
    const std::size_t total = x.slice_size();
    const std::size_t nblocks = (total + kEntryBlock - 1) / kEntryBlock;
#pragma omp parallel
    {
        std::vector<double> scratch;
#pragma omp for schedule(static)
        for (std::size_t b = 0; b < nblocks; ++b)
            apply_chunk(x, y, b * kEntryBlock, std::min(total, (b + 1) * kEntryBlock), scratch);
    }
    return y;
}

ResidueMatrix Extender::apply_serial(const ResidueMatrix& x) const
{
    if (x.basis().primes() != from_->primes())
        throw std::invalid_argument("rns::Extender: input basis mismatch");
    ResidueMatrix y(*to_, x.rows(), x.cols());
    std::vector<double> scratch;
    const std::size_t total = x.slice_size();
    for (std::size_t lo = 0; lo < total; lo += kEntryBlock)
        apply_chunk(x, y, lo, std::min(total, lo + kEntryBlock), scratch);
    return y;
}

}  // namespace detz::rns
