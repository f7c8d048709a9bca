#include "detz/generator.hpp"

#include <algorithm>
#include <numeric>

#include "detz/primes.hpp"

namespace detz {

std::uint64_t Rng::below(std::uint64_t bound)
{
    if (bound == 0)
        throw std::invalid_argument("Rng::below: zero bound");
    if ((bound & (bound - 1)) == 0)
        return next() & (bound - 1);
    // Rejection on the smallest covering power of two.
    std::uint64_t mask = bound - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    for (;;) {
        std::uint64_t v = next() & mask;
        if (v < bound)
            return v;
    }
}

std::int64_t Rng::range(std::int64_t lo, std::int64_t hi)
{
    if (lo > hi)
        throw std::invalid_argument("Rng::range: empty range");
    const std::uint64_t width = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
    std::uint64_t off = width == ~std::uint64_t{0} ? next() : below(width + 1);
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + off);
}

mpz_class Rng::bits(std::size_t nbits)
{
    mpz_class r = 0;
    std::size_t done = 0;
    while (done < nbits) {
        std::size_t take = std::min<std::size_t>(64, nbits - done);
        std::uint64_t w = next();
        if (take < 64)
            w &= (std::uint64_t{1} << take) - 1;
        mpz_class part;
        mpz_import(part.get_mpz_t(), 1, -1, sizeof w, 0, 0, &w);
        r += part << static_cast<mp_bitcnt_t>(done);
        done += take;
    }
    return r;
}

void MatGenSpec::validate() const
{
    if (n == 0)
        throw std::invalid_argument("MatGenSpec: n must be positive");
    if (num_nontrivial > n)
        throw std::invalid_argument("MatGenSpec: num_nontrivial exceeds n");
    if (factor_bits < 2 || factor_bits > 62)
        throw std::invalid_argument("MatGenSpec: factor_bits must be in [2, 62]");
    if (entry_bits < factor_bits)
        throw std::invalid_argument("MatGenSpec: entry_bits must be >= factor_bits");
    if (forced_factor && *forced_factor == 0)
        throw std::invalid_argument("MatGenSpec: forced factor must be positive");
}

namespace {

// Lines are rows (transposed = false) or columns of m.
void add_line_multiple(IntMat& m, bool columns, std::size_t target, std::size_t source, const mpz_class& c)
{
    const std::size_t n = m.rows();
    for (std::size_t k = 0; k < n; ++k) {
        mpz_class& t = columns ? m(k, target) : m(target, k);
        const mpz_class& s = columns ? m(k, source) : m(source, k);
        mpz_addmul(t.get_mpz_t(), c.get_mpz_t(), s.get_mpz_t());
    }
}

mpz_class coefficient(Rng& rng, std::size_t bits)
{
    mpz_class c;
    do {
        c = rng.bits(bits);
    } while (c == 0);
    if (rng.coin())
        c = -c;
    return c;
}

// One half of the lines (chosen by a random permutation) receives a random
// multiple of a line from the other half, then the roles swap. Sources are
// never modified while in use, so the whole step is a product of elementary
// operations and entry sizes grow by at most coef_bits + 1 per half step.
void mixing_half_step(IntMat& m, bool columns, bool swap, const std::vector<std::size_t>& perm,
                      std::size_t coef_bits, Rng& rng)
{
    const std::size_t n = perm.size();
    const std::size_t half = n / 2;
    const std::size_t t_lo = swap ? half : 0, t_hi = swap ? n : half;
    const std::size_t s_lo = swap ? 0 : half, s_hi = swap ? half : n;
    for (std::size_t t = t_lo; t < t_hi; ++t) {
        std::size_t s = s_lo + rng.below(s_hi - s_lo);
        add_line_multiple(m, columns, perm[t], perm[s], coefficient(rng, coef_bits));
    }
}

std::vector<std::size_t> shuffled(std::size_t n, Rng& rng)
{
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    for (std::size_t i = n; i > 1; --i)
        std::swap(p[i - 1], p[rng.below(i)]);
    return p;
}

}  // namespace

GeneratedMatrix gen_structured_full(const MatGenSpec& spec)
{
    spec.validate();
    const std::size_t n = spec.n;
    const double target_bits = static_cast<double>(spec.entry_bits);
    const double lo_bits = 0.8 * static_cast<double>(spec.entry_bits);
    const double hi_bits = 1.2 * static_cast<double>(spec.entry_bits);

    std::size_t coef_bits = std::max<std::size_t>(1, (spec.entry_bits + 31) / 32);
    constexpr int max_attempts = 8;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        Rng rng(spec.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(attempt));
        GeneratedMatrix g;
        g.factor = spec.forced_factor ? *spec.forced_factor : random_prime(spec.factor_bits, rng);

        std::vector<mpz_class> diag(n, mpz_class(1));
        for (std::size_t i = n - spec.num_nontrivial; i < n; ++i)
            mpz_import(diag[i].get_mpz_t(), 1, -1, sizeof g.factor, 0, 0, &g.factor);
        g.matrix = IntMat::diagonal(diag);

        std::vector<std::size_t> perm;
        auto half_step = [&](int k) {
            if (n < 2)
                return;
            const bool columns = k >= 2;
            if (k % 2 == 0)
                perm = shuffled(n, rng);
            mixing_half_step(g.matrix, columns, k % 2 == 1, perm, coef_bits, rng);
        };
        auto finish_round = [&] {
            if (rng.coin()) {
                std::size_t r = rng.below(n);
                for (std::size_t k = 0; k < n; ++k)
                    g.matrix(r, k) = -g.matrix(r, k);
                g.sign = -g.sign;
            }
            ++g.rounds;
        };
        auto reached = [&] { return static_cast<double>(bitlen(maxentry(g.matrix))) >= target_bits; };

        if (spec.mixing_rounds) {
            for (std::size_t r = 0; r < *spec.mixing_rounds; ++r) {
                for (int k = 0; k < 4; ++k)
                    half_step(k);
                finish_round();
            }
            return g;
        }

        // At least one full round; afterwards stop as soon as the bit target
        // is met, checking after every half step.
        for (int k = 0; k < 4; ++k)
            half_step(k);
        finish_round();
        const std::size_t round_cap = 64 + 4 * spec.entry_bits;
        while (n > 1 && !reached() && g.rounds < round_cap) {
            for (int k = 0; k < 4 && !reached(); ++k)
                half_step(k);
            finish_round();
        }
        const double got = static_cast<double>(bitlen(maxentry(g.matrix)));
        if (got >= lo_bits && got <= hi_bits)
            return g;
        coef_bits = std::max<std::size_t>(1, coef_bits / 2);
    }
    throw GenerationFailure("gen_structured: entry-size window [0.8, 1.2] * " +
                            std::to_string(spec.entry_bits) + " bits not reached");
}

IntMat random_matrix(std::size_t n, std::int64_t lo, std::int64_t hi, Rng& rng)
{
    IntMat m(n, n);
    for (auto& x : m.entries())
        x = mpz_class(std::to_string(rng.range(lo, hi)));
    return m;
}

IntMat random_matrix_bits(std::size_t n, std::size_t bits, Rng& rng)
{
    IntMat m(n, n);
    for (auto& x : m.entries()) {
        x = rng.bits(bits);
        if (rng.coin())
            x = -x;
    }
    return m;
}

}  // namespace detz
