#include "detz/unimodular.hpp"

#include <stdexcept>

#include "detz/modular.hpp"
#include "detz/primes.hpp"
#include "detz/rns.hpp"

namespace detz {

namespace {

using u128 = unsigned __int128;

// Sign of det(a) if det(a) = +-1 mod the first stream prime, else 0.
int residue_sign(const IntMat& a)
{
    PrimeStream ps;
    const std::uint64_t p = ps.next();
    const std::uint64_t r = det_mod_p(a, p);
    if (r == 1)
        return 1;
    if (r == p - 1)
        return -1;
    return 0;
}

// Consecutive primes below 2^22 from position `next` on, until their product
// exceeds `target`.
std::vector<std::uint32_t> take_primes(const mpz_class& target, std::size_t& next)
{
    std::vector<std::uint32_t> out;
    mpz_class prod = 1;
    while (prod <= target) {
        const std::uint32_t q = small_primes(1, next++)[0];
        out.push_back(q);
        prod *= q;
    }
    return out;
}

std::vector<double> inverse_residues(const rns::Basis& basis, const mpz_class& x)
{
    std::vector<double> out(basis.size());
    for (std::size_t k = 0; k < basis.size(); ++k) {
        const std::uint64_t q = basis.prime(k);
        out[k] = static_cast<double>(inv_mod(mpz_fdiv_ui(x.get_mpz_t(), q), q));
    }
    return out;
}

}  // namespace

UnimodResult verify_unimodular(const IntMat& a, UnimodStats* stats)
{
    if (!a.square() || a.rows() == 0)
        throw std::invalid_argument("verify_unimodular: matrix must be square and non-empty");
    UnimodStats local;
    UnimodStats& st = stats ? *stats : local;
    st = {};

    const int sign = residue_sign(a);
    if (sign == 0) {
        st.quick_reject = true;
        return UnimodResult::no();
    }

    const std::size_t n = a.rows();
    const mpz_class amax = maxentry(a);
    // Residual entries stay below c = n * max|A| + 1.
    const mpz_class c = amax * static_cast<unsigned long>(n) + 1;
    std::size_t next = 0;
    const std::vector<std::uint32_t> xq = take_primes(c * static_cast<unsigned long>(4 * n), next);
    const std::vector<std::uint32_t> pq = take_primes(c * 8, next);
    // Extension sums have to stay exact in doubles.
    if (xq.size() > 511 || pq.size() > 511) {
        st.used_reference = true;
        return verify_unimodular_reference(a);
    }
    st.x_primes = xq.size();
    st.aux_primes = pq.size();

    const rns::Basis qb(xq), pb(pq);
    const rns::Extender q_to_p(qb, pb), p_to_q(pb, qb);
    const mpz_class& x = qb.product();
    const std::vector<double> xinv = inverse_residues(pb, x);
    const std::size_t beta_bits = adjugate_entry_bits(a);
    const std::size_t x_log = bitlen(x) - 1;  // 2^x_log <= X

    const rns::ResidueMatrix aq = rns::to_residues(a, qb);
    const rns::ResidueMatrix ap = rns::to_residues(a, pb);
    rns::ResidueMatrix bq;
    if (!rns::inverse(aq, bq))
        return UnimodResult::no();  // det = 0 modulo some prime of X
    const rns::ResidueMatrix bp = q_to_p.apply(bq);

    // R_0 = (I - A B) / X; |B| <= (1/2 + 2^-30) X as represented on P.
    rns::ResidueMatrix rp = rns::sub_scaled(rns::identity(pb, n), rns::matmul(ap, bp), xinv);
    rns::ResidueMatrix rq = p_to_q.apply(rp);

    // Invariant A B_i = I - X^e R_i with |B_i| < 0.7 X^e. If A^{-1} is
    // integral with entries below 2^beta_bits and X^e >= 2^(beta_bits + 2),
    // then R_i = A (A^{-1} - B_i) / X^e must vanish.
    std::size_t e = 1;
    for (;;) {
        if (rp.is_zero())
            return UnimodResult::yes(sign);
        if (e * x_log >= beta_bits + 2)
            return UnimodResult::no();
        const rns::ResidueMatrix sq = rns::matmul(rq, rq);
        const rns::ResidueMatrix sp = rns::matmul(rp, rp);
        // M = B (S mod X) mod X, represented on P with |M| <= (1/2 + 2^-30) X.
        const rns::ResidueMatrix mp = q_to_p.apply(rns::matmul(bq, sq));
        rp = rns::sub_scaled(sp, rns::matmul(ap, mp), xinv);
        rq = p_to_q.apply(rp);
        e = 2 * e + 1;
        ++st.lift_steps;
    }
}

UnimodResult verify_unimodular_reference(const IntMat& a)
{
    if (!a.square() || a.rows() == 0)
        throw std::invalid_argument("verify_unimodular_reference: matrix must be square and non-empty");
    const int sign = residue_sign(a);
    if (sign == 0)
        return UnimodResult::no();

    const std::size_t n = a.rows();
    PrimeStream ps;
    ps.next();  // used by residue_sign
    const std::uint64_t p = ps.next();
    std::vector<std::uint64_t> c;
    if (!inverse_mod_p(a, p, c))
        return UnimodResult::no();

    // Lift B = A^{-1} mod p^k with p^k > 2^(beta_bits + 1) > 2 beta.
    const std::size_t beta_bits = adjugate_entry_bits(a);
    const std::size_t steps = (beta_bits + 1) / 61 + 1;
    mpz_class pz;
    mpz_import(pz.get_mpz_t(), 1, -1, sizeof p, 0, 0, &p);
    IntMat r = IntMat::identity(n);
    IntMat b(n, n);
    mpz_class pk = 1;
    std::vector<std::uint64_t> rm(n * n), xd(n * n);
    for (std::size_t s = 0; s < steps; ++s) {
        for (std::size_t i = 0; i < n * n; ++i)
            rm[i] = mpz_fdiv_ui(r.entries()[i].get_mpz_t(), p);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                u128 acc = 0;
                for (std::size_t l = 0; l < n; ++l)
                    acc = (acc + static_cast<u128>(c[i * n + l]) * rm[l * n + j]) % p;
                xd[i * n + j] = static_cast<std::uint64_t>(acc);
            }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                mpz_class& rij = r(i, j);
                for (std::size_t l = 0; l < n; ++l)
                    mpz_submul_ui(rij.get_mpz_t(), a(i, l).get_mpz_t(), xd[l * n + j]);
                mpz_divexact(rij.get_mpz_t(), rij.get_mpz_t(), pz.get_mpz_t());
                mpz_class t = pk;
                t *= static_cast<unsigned long>(xd[i * n + j]);
                b(i, j) += t;
            }
        pk *= pz;
    }
    for (auto& v : b.entries())
        v = symmetric_remainder(v, pk);

    // A B = I holds exactly once it holds modulo primes whose product exceeds
    // twice the largest possible entry of A B - I.
    const mpz_class bound = 2 * (maxentry(a) * maxentry(b) * static_cast<unsigned long>(n) + 1);
    mpz_class prod = 1;
    while (prod <= bound) {
        const std::uint64_t q = ps.next();
        prod *= mpz_class(std::to_string(q));
        const auto ar = reduce_mod(a, q), br = reduce_mod(b, q);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                u128 acc = 0;
                for (std::size_t l = 0; l < n; ++l)
                    acc = (acc + static_cast<u128>(ar[i * n + l]) * br[l * n + j]) % q;
                if (acc != (i == j ? 1u : 0u))
                    return UnimodResult::no();
            }
    }
    return UnimodResult::yes(sign);
}

}  // namespace detz
