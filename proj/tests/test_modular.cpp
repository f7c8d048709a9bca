#include <doctest.h>

#include <algorithm>
#include <set>

#include "detz/generator.hpp"
#include "detz/modular.hpp"
#include "detz/primes.hpp"
#include "oracles.hpp"

using namespace detz;

namespace {

const IntMat kM{{3, -5, 7}, {1, 1, -7}, {1, 9, 5}};

std::uint64_t mod_of(const mpz_class& x, std::uint64_t p)
{
    return mpz_fdiv_ui(x.get_mpz_t(), p);
}

}  // namespace

TEST_CASE("primality and the prime stream")
{
    CHECK(is_prime_u64(2));
    CHECK(is_prime_u64(97));
    CHECK_FALSE(is_prime_u64(1));
    CHECK_FALSE(is_prime_u64(91));
    CHECK(is_prime_u64((std::uint64_t{1} << 61) - 1));
    CHECK_FALSE(is_prime_u64(3215031751ULL));  // strong pseudoprime to bases 2, 3, 5, 7

    PrimeStream ps;
    std::set<std::uint64_t> seen;
    std::uint64_t prev = ~std::uint64_t{0};
    for (int i = 0; i < 200; ++i) {
        const std::uint64_t p = ps.next();
        CHECK(p > (std::uint64_t{1} << 61));
        CHECK(p < (std::uint64_t{1} << 62));
        CHECK(p < prev);
        CHECK(is_prime_u64(p));
        CHECK(seen.insert(p).second);
        prev = p;
    }
    CHECK(ps.emitted().size() == 200);

    const auto sp = small_primes(50);
    for (std::size_t i = 0; i < sp.size(); ++i) {
        CHECK(sp[i] < (1u << 22));
        CHECK(is_prime_u64(sp[i]));
        if (i)
            CHECK(sp[i] < sp[i - 1]);
    }
    CHECK(small_primes(3, 10) == std::vector<std::uint32_t>(sp.begin() + 10, sp.begin() + 13));
}

TEST_CASE("det_mod_p examples")
{
    PrimeStream ps;
    const std::uint64_t p = ps.next();
    CHECK(det_mod_p(IntMat::identity(5), p) == 1);
    // det(M) = 320 (cofactor expansion); 320 mod 7 = 5.
    CHECK(oracle::cofactor_det(kM) == 320);
    CHECK(det_mod_p(kM, 7) == 5);
    CHECK(det_mod_p(IntMat{{7, 0}, {0, 1}}, 7) == 0);
    CHECK(det_mod_p(IntMat{{0, 1, 0}, {1, 0, 0}, {0, 0, 1}}, 7) == 6);
}

TEST_CASE("det_mod_p agrees with the cofactor oracle")
{
    Rng rng(21);
    PrimeStream ps;
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 1 + rng.below(5);
        const IntMat a = random_matrix_bits(n, 1 + rng.below(200), rng);
        const std::uint64_t p = ps.next();
        CHECK(det_mod_p(a, p) == mod_of(oracle::cofactor_det(a), p));
    }
}

TEST_CASE("det_mod_p_batch matches the serial reference")
{
    Rng rng(22);
    const IntMat a = random_matrix_bits(12, 300, rng);
    PrimeStream ps;
    std::vector<std::uint64_t> primes;
    for (int i = 0; i < 17; ++i)
        primes.push_back(ps.next());
    CHECK(det_mod_p_batch(a, primes) == det_mod_p_batch_serial(a, primes));
}

TEST_CASE("inverse_mod_p")
{
    Rng rng(23);
    const std::uint64_t p = 1000003;
    const IntMat a = random_matrix(6, -1000, 1000, rng);
    std::vector<std::uint64_t> inv;
    REQUIRE(inverse_mod_p(a, p, inv));
    const auto ar = reduce_mod(a, p);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) {
            unsigned __int128 s = 0;
            for (std::size_t k = 0; k < 6; ++k)
                s += static_cast<unsigned __int128>(ar[i * 6 + k]) * inv[k * 6 + j];
            CHECK(static_cast<std::uint64_t>(s % p) == (i == j ? 1u : 0u));
        }
    CHECK_FALSE(inverse_mod_p(IntMat{{2, 4}, {1, 2}}, p, inv));
}

TEST_CASE("inv_mod")
{
    CHECK(inv_mod(3, 7) == 5);
    CHECK(inv_mod(1, 2) == 1);
    CHECK_THROWS_AS(inv_mod(0, 7), std::domain_error);
}

TEST_CASE("crt_add examples")
{
    CrtAccumulator acc;
    acc.add(5, 2);
    CHECK(acc.residue() == 2);
    CHECK(acc.modulus() == 5);
    acc.add(7, 3);
    CHECK(acc.residue() == 17);
    CHECK(acc.modulus() == 35);
    CHECK_THROWS_AS(acc.add(5, 1), DuplicatePrime);
    CHECK(acc.residue() == 17);
}

TEST_CASE("symmetric_remainder examples")
{
    CHECK(symmetric_remainder(34, 35) == -1);
    CHECK(symmetric_remainder(17, 35) == 17);
    CHECK(symmetric_remainder(18, 35) == -17);
    CHECK(symmetric_remainder(0, 35) == 0);
    CHECK(symmetric_remainder(2, 4) == 2);
    CHECK(symmetric_remainder(-1, 35) == -1);
    CHECK_THROWS_AS(symmetric_remainder(1, 0), std::invalid_argument);
}

TEST_CASE("CRT recovers det once m exceeds twice |det|")
{
    Rng rng(24);
    for (int t = 0; t < 60; ++t) {
        const std::size_t n = 1 + rng.below(5);
        const IntMat a = random_matrix_bits(n, 1 + rng.below(150), rng);
        const mpz_class det = oracle::cofactor_det(a);
        PrimeStream ps2;
        CrtAccumulator acc2;
        while (acc2.modulus() <= 2 * abs(det)) {
            const std::uint64_t p = ps2.next();
            acc2.add(p, det_mod_p(a, p));
        }
        CHECK(acc2.symmetric() == det);
    }
}

TEST_CASE("CRT result is independent of the order primes are added")
{
    Rng rng(25);
    const IntMat a = random_matrix_bits(6, 200, rng);
    PrimeStream ps;
    std::vector<std::uint64_t> primes;
    for (int i = 0; i < 30; ++i)
        primes.push_back(ps.next());
    const auto res = det_mod_p_batch(a, primes);
    CrtAccumulator fwd, rev;
    for (std::size_t i = 0; i < primes.size(); ++i)
        fwd.add(primes[i], res[i]);
    for (std::size_t i = primes.size(); i-- > 0;)
        rev.add(primes[i], res[i]);
    CHECK(fwd.residue() == rev.residue());
    CHECK(fwd.modulus() == rev.modulus());

    CrtAccumulator lo, hi;
    for (std::size_t i = 0; i < 13; ++i)
        lo.add(primes[i], res[i]);
    for (std::size_t i = 13; i < primes.size(); ++i)
        hi.add(primes[i], res[i]);
    const CrtAccumulator merged = crt_merge(hi, lo);
    CHECK(merged.residue() == fwd.residue());
    CHECK(merged.modulus() == fwd.modulus());
    CHECK_THROWS_AS(crt_merge(fwd, lo), DuplicatePrime);
    CHECK(fwd.symmetric() == oracle::bareiss_det(a));
}

TEST_CASE("coprime_view drops primes dividing the argument")
{
    CrtAccumulator acc;
    acc.add(5, 2);
    acc.add(7, 3);
    acc.add(11, 4);
    const auto v = acc.coprime_view(mpz_class(14));
    CHECK(v.m == 55);
    CHECK(v.primes == std::vector<std::uint64_t>{5, 11});
    CHECK(v.r % 5 == 2);
    CHECK(v.r % 11 == 4);
    const auto all = acc.coprime_view(mpz_class(1));
    CHECK(all.m == acc.modulus());
}

TEST_CASE("crt_det_candidate")
{
    PrimeStream ps;
    auto c = crt_det_candidate(IntMat{{3, 0, 0}, {0, 5, 0}, {0, 0, 1}}, 3, 60, ps);
    CHECK(c.d == 15);
    CHECK(c.acc.primes().size() == 1);

    PrimeStream ps2;
    c = crt_det_candidate(IntMat::identity(4), 0, 60, ps2);
    CHECK(c.d == 1);
    CHECK(c.acc.primes().size() == 1);

    Rng rng(26);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 1 + rng.below(5);
        const IntMat a = random_matrix_bits(n, 1 + rng.below(300), rng);
        PrimeStream s;
        const auto cand = crt_det_candidate(a, maxentry_log2_ceil(a), 60, s);
        mpz_class diff = cand.d - oracle::cofactor_det(a);
        CHECK(mpz_divisible_p(diff.get_mpz_t(), cand.acc.modulus().get_mpz_t()));
    }
}

TEST_CASE("crt_stable")
{
    mpz_class m;
    mpz_ui_pow_ui(m.get_mpz_t(), 2, 100);
    CHECK(crt_stable(mpz_class(1) << 38, m, 60));     // 39 + 60 < 100
    CHECK_FALSE(crt_stable(mpz_class(1) << 39, m, 60));
    CHECK(crt_stable(0, m, 60));
    CHECK_FALSE(crt_stable(0, mpz_class(1) << 60, 60));
}

TEST_CASE("crt_extend skips primes dividing the divisor")
{
    Rng rng(27);
    const IntMat a = random_matrix_bits(5, 100, rng);
    PrimeStream ps;
    CrtAccumulator acc;
    const std::uint64_t first = PrimeStream().next();
    mpz_class avoid = static_cast<unsigned long>(first);
    crt_extend(acc, a, 500, avoid, ps);
    CHECK_FALSE(acc.contains(first));
    CHECK(bitlen(acc.coprime_view(avoid).m) >= 500);
    CHECK(acc.symmetric() == oracle::cofactor_det(a));
}
