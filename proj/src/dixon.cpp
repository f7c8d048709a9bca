#include "detz/dixon.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>

#include <omp.h>

#include "detz/modular.hpp"

namespace detz {

std::pair<mpz_class, mpz_class> rational_reconstruct(const mpz_class& r, const mpz_class& m,
                                                     const mpz_class& num_bound, const mpz_class& den_bound)
{
    if (m <= 0 || num_bound < 0 || den_bound < 1)
        throw std::invalid_argument("rational_reconstruct: bad modulus or bounds");
    // Remainder sequence of (m, r mod m) with cofactors of r: r_i = t_i * r (mod m).
    mpz_class r0 = m, r1, t0 = 0, t1 = 1, q, tmp;
    mpz_fdiv_r(r1.get_mpz_t(), r.get_mpz_t(), m.get_mpz_t());
    while (r1 > num_bound) {
        mpz_fdiv_qr(q.get_mpz_t(), tmp.get_mpz_t(), r0.get_mpz_t(), r1.get_mpz_t());
        r0 = r1;
        r1 = tmp;
        tmp = t0 - q * t1;
        t0 = t1;
        t1 = tmp;
    }
    if (t1 == 0 || abs(t1) > den_bound)
        throw NoSolution("rational_reconstruct: no fraction within bounds");
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), r1.get_mpz_t(), t1.get_mpz_t());
    if (g != 1)
        throw NoSolution("rational_reconstruct: no fraction within bounds");
    if (t1 < 0)
        return {-r1, -t1};
    return {r1, t1};
}

namespace {

using u128 = unsigned __int128;

mpz_class from_u64(std::uint64_t v)
{
    mpz_class z;
    mpz_import(z.get_mpz_t(), 1, -1, sizeof v, 0, 0, &v);
    return z;
}

// p-adic digits d_0, ..., d_{k-1} (digit-major, n per step) combined into
// sum_l d_l p^l for every coordinate, by splitting the digit range in halves.
class DigitCombiner {
public:
    explicit DigitCombiner(std::uint64_t p) : p_(from_u64(p)) {}

    const mpz_class& power(std::size_t e)
    {
        auto it = pow_.find(e);
        if (it != pow_.end())
            return it->second;
        mpz_class v;
        mpz_pow_ui(v.get_mpz_t(), p_.get_mpz_t(), e);
        return pow_.emplace(e, std::move(v)).first->second;
    }

    mpz_class combine(const std::vector<std::uint64_t>& digits, std::size_t n, std::size_t coord, std::size_t lo,
                      std::size_t hi)
    {
        if (hi - lo == 1)
            return from_u64(digits[lo * n + coord]);
        const std::size_t mid = lo + (hi - lo) / 2;
        mpz_class low = combine(digits, n, coord, lo, mid);
        mpz_class high = combine(digits, n, coord, mid, hi);
        mpz_addmul(low.get_mpz_t(), high.get_mpz_t(), power(mid - lo).get_mpz_t());
        return low;
    }

    // Warm the power cache for every split size used by combine(lo, hi), so
    // that concurrent calls only read it.
    void prepare(std::size_t lo, std::size_t hi)
    {
        if (hi - lo <= 1)
            return;
        const std::size_t mid = lo + (hi - lo) / 2;
        power(mid - lo);
        prepare(lo, mid);
        prepare(mid, hi);
    }

private:
    mpz_class p_;
    std::map<std::size_t, mpz_class> pow_;
};

struct Bounds {
    std::size_t num_bits;   // |numerator| <= 2^num_bits
    std::size_t den_bits;   // denominator <= 2^den_bits
};

// Numerators are Cramer determinants (a column of A replaced by b), bounded
// by the column Hadamard bound of A times ||b||_2 <= sqrt(n) ||b||_inf.
Bounds solution_bounds(const IntMat& a, const IntVec& b)
{
    mpz_class bmax = 0;
    for (const auto& x : b)
        if (abs(x) > bmax)
            bmax = abs(x);
    const std::size_t n = a.rows();
    const std::size_t sqrt_n_bits = (bitlen(mpz_class(static_cast<unsigned long>(n))) + 1) / 2;
    return {hadamard_col_bits(a) + sqrt_n_bits + bitlen(bmax), hadamard_bits(a)};
}

// Candidate solution from x mod m, valid when every denominator is at most
// 2^den_bits. Returns nullopt if reconstruction or the exact check fails.
std::optional<RationalSolution> try_reconstruct(const IntMat& a, const IntVec& b, const std::vector<mpz_class>& x,
                                                const mpz_class& m, const mpz_class& num_bound,
                                                const mpz_class& den_bound)
{
    const std::size_t n = x.size();
    std::vector<mpz_class> num(n), den(n);
    mpz_class common = 1, t;
    for (std::size_t i = 0; i < n; ++i) {
        // Most coordinates share the denominator found so far.
        t = x[i] * common;
        t = symmetric_remainder(t, m);
        if (abs(t) <= num_bound) {
            num[i] = t;
            den[i] = common;
            continue;
        }
        try {
            auto [nu, de] = rational_reconstruct(x[i], m, num_bound, den_bound);
            num[i] = nu;
            den[i] = de;
        } catch (const NoSolution&) {
            return std::nullopt;
        }
        mpz_lcm(common.get_mpz_t(), common.get_mpz_t(), den[i].get_mpz_t());
        if (common > den_bound)
            return std::nullopt;
    }
    RationalSolution s;
    s.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        mpz_divexact(t.get_mpz_t(), common.get_mpz_t(), den[i].get_mpz_t());
        s.y[i] = num[i] * t;
    }
    mpz_class g = common;
    for (const auto& v : s.y)
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), v.get_mpz_t());
    if (g != 1) {
        for (auto& v : s.y)
            mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), g.get_mpz_t());
        mpz_divexact(common.get_mpz_t(), common.get_mpz_t(), g.get_mpz_t());
    }
    s.d = common;
    const IntVec ay = multiply(a, s.y);
    for (std::size_t i = 0; i < n; ++i)
        if (ay[i] != s.d * b[i])
            return std::nullopt;
    return s;
}

}  // namespace

RationalSolution solve_rational(const IntMat& a, const IntVec& b, std::uint64_t p)
{
    if (!a.square())
        throw std::invalid_argument("solve_rational: matrix not square");
    const std::size_t n = a.rows();
    if (b.size() != n)
        throw std::invalid_argument("solve_rational: right-hand side has wrong length");
    if (p < 3 || p >= (std::uint64_t{1} << 62))
        throw std::invalid_argument("solve_rational: prime out of range");

    if (std::all_of(b.begin(), b.end(), [](const mpz_class& v) { return v == 0; }))
        return {IntVec(n, 0), 1};

    std::vector<std::uint64_t> c;
    if (!inverse_mod_p(a, p, c))
        throw SingularModP("solve_rational: matrix singular modulo " + std::to_string(p));

    const Bounds bounds = solution_bounds(a, b);
    mpz_class num_bound, den_bound;
    mpz_ui_pow_ui(num_bound.get_mpz_t(), 2, bounds.num_bits);
    // Proven stop: p^k > 2^(num_bits + den_bits + 1) = 2 N D.
    const std::size_t full_bits = bounds.num_bits + bounds.den_bits + 2;
    // Early attempts assume a small denominator first and double its budget.
    std::size_t next_check = bounds.num_bits + 64;

    DigitCombiner comb(p);
    std::vector<std::uint64_t> digits;
    std::vector<mpz_class> x(n, 0);   // solution mod p^k
    std::size_t combined = 0;         // digits already folded into x
    mpz_class modulus = 1;
    const mpz_class pz = from_u64(p);

    std::vector<mpz_class> r = b;
    std::vector<std::uint64_t> rm(n), xd(n);
    std::size_t k = 0;
    for (;;) {
        for (std::size_t i = 0; i < n; ++i)
            rm[i] = mpz_fdiv_ui(r[i].get_mpz_t(), p);
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint64_t* crow = &c[i * n];
            u128 acc = 0;
            std::size_t pending = 0;
            for (std::size_t j = 0; j < n; ++j) {
                acc += static_cast<u128>(crow[j]) * rm[j];
                // Products are below 2^124: eight of them on top of a reduced
                // residue cannot overflow.
                if (++pending == 8) {
                    acc %= p;
                    pending = 0;
                }
            }
            xd[i] = static_cast<std::uint64_t>(acc % p);
        }
        // r <- (r - A xd) / p, exact by construction.
        for (std::size_t i = 0; i < n; ++i) {
            const mpz_class* arow = a.row(i);
            for (std::size_t j = 0; j < n; ++j)
                if (xd[j] != 0)
                    mpz_submul_ui(r[i].get_mpz_t(), arow[j].get_mpz_t(), xd[j]);
            mpz_divexact(r[i].get_mpz_t(), r[i].get_mpz_t(), pz.get_mpz_t());
        }
        digits.insert(digits.end(), xd.begin(), xd.end());
        ++k;

        const std::size_t mod_bits_lower = k * 61;  // p > 2^61
        const bool at_full = mod_bits_lower >= full_bits;
        if (mod_bits_lower < next_check && !at_full)
            continue;

        // Fold the new digits into x.
        comb.prepare(combined, k);
        const mpz_class& shift = modulus;
        const auto nn = static_cast<std::ptrdiff_t>(n);
        std::vector<mpz_class> block(n);
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t i = 0; i < nn; ++i)
            block[static_cast<std::size_t>(i)] = comb.combine(digits, n, static_cast<std::size_t>(i), combined, k);
        for (std::size_t i = 0; i < n; ++i)
            mpz_addmul(x[i].get_mpz_t(), block[i].get_mpz_t(), shift.get_mpz_t());
        modulus *= comb.power(k - combined);
        combined = k;

        // Largest denominator budget keeping m > 2 N D.
        const std::size_t mbits = bitlen(modulus);
        const std::size_t db = mbits > bounds.num_bits + 3 ? mbits - bounds.num_bits - 3 : 0;
        mpz_ui_pow_ui(den_bound.get_mpz_t(), 2, db);
        if (auto s = try_reconstruct(a, b, x, modulus, num_bound, den_bound))
            return *s;
        if (at_full)
            throw ReconstructionFailure("solve_rational: reconstruction failed at the proven bound");
        next_check = bounds.num_bits + 2 * (next_check - bounds.num_bits);
    }
}

}  // namespace detz
