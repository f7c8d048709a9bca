#include "detz/modular.hpp"

#include <algorithm>
#include <stdexcept>

#include <omp.h>

namespace detz {

namespace {

using u128 = unsigned __int128;

inline std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t p)
{
    return static_cast<std::uint64_t>(static_cast<u128>(a) * b % p);
}

mpz_class from_u64(std::uint64_t v)
{
    mpz_class z;
    mpz_import(z.get_mpz_t(), 1, -1, sizeof v, 0, 0, &v);
    return z;
}

std::uint64_t mod_u64(const mpz_class& x, std::uint64_t p)
{
    static_assert(sizeof(unsigned long) == sizeof(std::uint64_t), "64-bit unsigned long required");
    return mpz_fdiv_ui(x.get_mpz_t(), p);
}

}  // namespace

std::vector<std::uint64_t> reduce_mod(const IntMat& a, std::uint64_t p)
{
    std::vector<std::uint64_t> out(a.entries().size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = mod_u64(a.entries()[i], p);
    return out;
}

std::uint64_t inv_mod(std::uint64_t x, std::uint64_t p)
{
    // Extended Euclid on signed 128-bit values.
    __int128 t = 0, new_t = 1;
    __int128 r = p, new_r = x % p;
    while (new_r != 0) {
        __int128 q = r / new_r;
        __int128 tmp = t - q * new_t;
        t = new_t;
        new_t = tmp;
        tmp = r - q * new_r;
        r = new_r;
        new_r = tmp;
    }
    if (r != 1)
        throw std::domain_error("inv_mod: not invertible");
    if (t < 0)
        t += p;
    return static_cast<std::uint64_t>(t);
}

std::uint64_t det_mod_p(const IntMat& a, std::uint64_t p)
{
    if (!a.square())
        throw std::invalid_argument("det_mod_p: matrix not square");
    const std::size_t n = a.rows();
    std::vector<std::uint64_t> m = reduce_mod(a, p);
    std::uint64_t det = 1 % p;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && m[piv * n + c] == 0)
            ++piv;
        if (piv == n)
            return 0;
        if (piv != c) {
            std::swap_ranges(m.begin() + static_cast<std::ptrdiff_t>(piv * n + c),
                             m.begin() + static_cast<std::ptrdiff_t>(piv * n + n),
                             m.begin() + static_cast<std::ptrdiff_t>(c * n + c));
            det = det == 0 ? 0 : p - det;
        }
        const std::uint64_t pv = m[c * n + c];
        det = mul_mod(det, pv, p);
        const std::uint64_t inv = inv_mod(pv, p);
        const std::uint64_t* prow = &m[c * n];
        for (std::size_t i = c + 1; i < n; ++i) {
            std::uint64_t* row = &m[i * n];
            if (row[c] == 0)
                continue;
            const std::uint64_t f = p - mul_mod(row[c], inv, p);
            for (std::size_t j = c + 1; j < n; ++j)
                row[j] = static_cast<std::uint64_t>((row[j] + static_cast<u128>(f) * prow[j]) % p);
            row[c] = 0;
        }
    }
    return det;
}

bool inverse_mod_p(const IntMat& a, std::uint64_t p, std::vector<std::uint64_t>& inv)
{
    if (!a.square())
        throw std::invalid_argument("inverse_mod_p: matrix not square");
    const std::size_t n = a.rows();
    const std::size_t w = 2 * n;
    std::vector<std::uint64_t> m(n * w, 0);
    const std::vector<std::uint64_t> red = reduce_mod(a, p);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(red.begin() + static_cast<std::ptrdiff_t>(i * n),
                  red.begin() + static_cast<std::ptrdiff_t>((i + 1) * n), m.begin() + static_cast<std::ptrdiff_t>(i * w));
        m[i * w + n + i] = 1 % p;
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && m[piv * w + c] == 0)
            ++piv;
        if (piv == n)
            return false;
        if (piv != c)
            std::swap_ranges(m.begin() + static_cast<std::ptrdiff_t>(piv * w),
                             m.begin() + static_cast<std::ptrdiff_t>((piv + 1) * w),
                             m.begin() + static_cast<std::ptrdiff_t>(c * w));
        std::uint64_t* prow = &m[c * w];
        const std::uint64_t inv_p = inv_mod(prow[c], p);
        for (std::size_t j = c; j < w; ++j)
            prow[j] = mul_mod(prow[j], inv_p, p);
        for (std::size_t i = 0; i < n; ++i) {
            if (i == c || m[i * w + c] == 0)
                continue;
            std::uint64_t* row = &m[i * w];
            const std::uint64_t f = p - row[c];
            for (std::size_t j = c; j < w; ++j)
                row[j] = static_cast<std::uint64_t>((row[j] + static_cast<u128>(f) * prow[j]) % p);
        }
    }
    inv.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
        std::copy(m.begin() + static_cast<std::ptrdiff_t>(i * w + n),
                  m.begin() + static_cast<std::ptrdiff_t>((i + 1) * w), inv.begin() + static_cast<std::ptrdiff_t>(i * n));
    return true;
}

std::vector<std::uint64_t> det_mod_p_batch(const IntMat& a, std::span<const std::uint64_t> primes)
{
    std::vector<std::uint64_t> out(primes.size());
    const auto count = static_cast<std::ptrdiff_t>(primes.size());
#pragma omp parallel for schedule(dynamic, 1) if (count > 1)
    for (std::ptrdiff_t i = 0; i < count; ++i)
        out[static_cast<std::size_t>(i)] = det_mod_p(a, primes[static_cast<std::size_t>(i)]);
    return out;
}

std::vector<std::uint64_t> det_mod_p_batch_serial(const IntMat& a, std::span<const std::uint64_t> primes)
{
    std::vector<std::uint64_t> out;
    out.reserve(primes.size());
    for (std::uint64_t p : primes)
        out.push_back(det_mod_p(a, p));
    return out;
}

mpz_class symmetric_remainder(const mpz_class& r, const mpz_class& m)
{
    if (m <= 0)
        throw std::invalid_argument("symmetric_remainder: modulus must be positive");
    mpz_class s;
    mpz_fdiv_r(s.get_mpz_t(), r.get_mpz_t(), m.get_mpz_t());
    // s in [0, m); move to (-m/2, m/2].
    mpz_class twice = s << 1;
    if (twice > m)
        s -= m;
    return s;
}

bool CrtAccumulator::contains(std::uint64_t p) const
{
    return std::find(primes_.begin(), primes_.end(), p) != primes_.end();
}

void CrtAccumulator::add(std::uint64_t p, std::uint64_t rp)
{
    if (p < 2)
        throw std::invalid_argument("CrtAccumulator::add: bad modulus");
    if (contains(p))
        throw DuplicatePrime("CrtAccumulator::add: prime " + std::to_string(p) + " already used");
    rp %= p;
    if (primes_.empty()) {
        r_ = from_u64(rp);
        m_ = from_u64(p);
        primes_.push_back(p);
        return;
    }
    // r + m * ((rp - r) * m^{-1} mod p)
    const std::uint64_t r_mod = mod_u64(r_, p);
    const std::uint64_t m_mod = mod_u64(m_, p);
    const std::uint64_t diff = rp >= r_mod ? rp - r_mod : rp + (p - r_mod);
    const std::uint64_t t = mul_mod(diff, inv_mod(m_mod, p), p);
    mpz_class tz = from_u64(t);
    mpz_addmul(r_.get_mpz_t(), m_.get_mpz_t(), tz.get_mpz_t());
    m_ *= from_u64(p);
    primes_.push_back(p);
}

CrtAccumulator::View CrtAccumulator::coprime_view(const mpz_class& avoid) const
{
    View v;
    v.m = 1;
    bool all = true;
    for (std::uint64_t p : primes_) {
        if (avoid != 0 && mod_u64(avoid, p) == 0) {
            all = false;
            continue;
        }
        v.primes.push_back(p);
        v.m *= from_u64(p);
    }
    if (all) {
        v.r = r_;
        v.m = m_;
    } else {
        mpz_fdiv_r(v.r.get_mpz_t(), r_.get_mpz_t(), v.m.get_mpz_t());
    }
    return v;
}

CrtAccumulator crt_merge(const CrtAccumulator& a, const CrtAccumulator& b)
{
    for (std::uint64_t p : b.primes())
        if (a.contains(p))
            throw DuplicatePrime("crt_merge: overlapping prime sets");
    if (a.primes().empty())
        return b;
    if (b.primes().empty())
        return a;
    CrtAccumulator out = a;
    // x = ra + ma * ((rb - ra) * ma^{-1} mod mb)
    mpz_class inv, t;
    mpz_invert(inv.get_mpz_t(), a.modulus().get_mpz_t(), b.modulus().get_mpz_t());
    t = b.residue() - a.residue();
    t *= inv;
    mpz_fdiv_r(t.get_mpz_t(), t.get_mpz_t(), b.modulus().get_mpz_t());
    out.r_ = a.residue() + a.modulus() * t;
    out.m_ = a.modulus() * b.modulus();
    out.primes_.insert(out.primes_.end(), b.primes().begin(), b.primes().end());
    return out;
}

bool crt_stable(const mpz_class& d, const mpz_class& m, std::size_t window)
{
    const long log2m = static_cast<long>(bitlen(m)) - 1;
    const long lhs = static_cast<long>(bitlen(d)) + static_cast<long>(window);
    if (d == 0)
        return log2m > static_cast<long>(window);
    return lhs < log2m;
}

CrtCandidate crt_det_candidate(const IntMat& a, std::size_t e, std::size_t window, PrimeStream& primes)
{
    CrtCandidate out;
    for (;;) {
        const std::uint64_t p = primes.next();
        out.acc.add(p, det_mod_p(a, p));
        out.d = out.acc.symmetric();
        if (out.acc.log2_floor() > static_cast<long>(e))
            break;
        if (crt_stable(out.d, out.acc.modulus(), window))
            break;
    }
    return out;
}

void crt_extend(CrtAccumulator& acc, const IntMat& a, std::size_t target_bits, const mpz_class& avoid,
                PrimeStream& primes)
{
    for (;;) {
        const std::size_t have = bitlen(acc.coprime_view(avoid).m);
        if (have >= target_bits)
            return;
        // Each stream prime contributes more than 61 bits.
        const std::size_t need = (target_bits - have + 60) / 61;
        const std::size_t batch = std::max<std::size_t>(need, 1);
        std::vector<std::uint64_t> ps;
        ps.reserve(batch);
        while (ps.size() < batch) {
            std::uint64_t p = primes.next();
            if (avoid != 0 && mod_u64(avoid, p) == 0)
                continue;
            ps.push_back(p);
        }
        const auto rs = det_mod_p_batch(a, ps);
        for (std::size_t i = 0; i < ps.size(); ++i)
            acc.add(ps[i], rs[i]);
    }
}

}  // namespace detz
