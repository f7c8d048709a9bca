#include <doctest.h>

#include "detz/generator.hpp"
#include "detz/intmat.hpp"
#include "oracles.hpp"

using namespace detz;

namespace {

const IntMat kM{{3, -5, 7}, {1, 1, -7}, {1, 9, 5}};

mpz_class pow2(std::size_t e)
{
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), 2, e);
    return r;
}

}  // namespace

TEST_CASE("maxentry uses absolute values")
{
    CHECK(maxentry(IntMat::identity(3)) == 1);
    CHECK(maxentry(kM) == 9);
    CHECK(maxentry(IntMat{{-4, -4}, {-4, -4}}) == 4);
    CHECK(maxentry(IntMat{{1, -20}, {3, 19}}) == 20);
    CHECK_THROWS_AS(maxentry(IntMat()), std::invalid_argument);
}

TEST_CASE("maxentry_log2_ceil")
{
    CHECK(maxentry_log2_ceil(IntMat::identity(2)) == 0);
    CHECK(maxentry_log2_ceil(IntMat{{8, 0}, {0, 1}}) == 3);
    CHECK(maxentry_log2_ceil(IntMat{{9, 0}, {0, 1}}) == 4);
    CHECK(maxentry_log2_ceil(kM) == 4);
}

TEST_CASE("hadamard_bits on small examples")
{
    CHECK(hadamard_bits(IntMat::identity(3)) == 3);
    // Row norms^2 (83, 51, 107): bit lengths 7 + 6 + 7 = 20 -> 1 + 10.
    CHECK(hadamard_row_bits(kM) == 11);
    // Column norms^2 (11, 107, 123): 4 + 7 + 7 = 18 -> 1 + 9.
    CHECK(hadamard_col_bits(kM) == 10);
    CHECK(hadamard_bits(kM) == 10);
    CHECK(pow2(hadamard_bits(kM) - 1) > 320);
}

TEST_CASE("hadamard_bits bounds the all-ones matrix")
{
    for (std::size_t n = 1; n <= 12; ++n) {
        IntMat a(n, n);
        for (auto& x : a.entries())
            x = 1;
        // Exact bound n^(n/2); compare squares to stay in integers.
        mpz_class nn;
        mpz_ui_pow_ui(nn.get_mpz_t(), n, n);
        const mpz_class lhs = pow2(hadamard_bits(a));
        CHECK(lhs * lhs >= 4 * nn);
    }
}

TEST_CASE("hadamard_bits exceeds twice |det| against the cofactor oracle")
{
    Rng rng(11);
    for (int t = 0; t < 300; ++t) {
        const std::size_t n = 1 + rng.below(6);
        const IntMat a = t % 2 ? random_matrix(n, -50, 50, rng) : random_matrix_bits(n, 1 + rng.below(90), rng);
        const mpz_class det = oracle::cofactor_det(a);
        CHECK(pow2(hadamard_bits(a)) > 2 * abs(det));
        CHECK(pow2(hadamard_row_bits(a)) > 2 * abs(det));
        CHECK(pow2(hadamard_col_bits(a)) > 2 * abs(det));
    }
}

TEST_CASE("adjugate_entry_bits bounds every minor")
{
    Rng rng(12);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 2 + rng.below(4);
        const IntMat a = random_matrix(n, -30, 30, rng);
        const IntMat adj = oracle::adjugate(a);
        const mpz_class bound = pow2(adjugate_entry_bits(a));
        for (const auto& x : adj.entries())
            CHECK(abs(x) <= bound);
    }
}

TEST_CASE("maxentry sits between line 1-norms")
{
    Rng rng(13);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 1 + rng.below(7);
        const IntMat a = random_matrix_bits(n, 40, rng);
        const mpz_class m = maxentry(a);
        for (std::size_t i = 0; i < n; ++i) {
            mpz_class r = 0, c = 0;
            for (std::size_t j = 0; j < n; ++j) {
                r += abs(a(i, j));
                c += abs(a(j, i));
            }
            CHECK(r <= m * static_cast<unsigned long>(n));
            CHECK(c <= m * static_cast<unsigned long>(n));
        }
        bool attained = false;
        for (std::size_t i = 0; i < n; ++i) {
            mpz_class r = 0;
            for (std::size_t j = 0; j < n; ++j)
                r += abs(a(i, j));
            attained = attained || r >= m;
        }
        CHECK(attained);
    }
}

TEST_CASE("parse and format")
{
    CHECK(parse_matrix("2 2\n1 0\n0 1\n") == IntMat::identity(2));
    CHECK(format_matrix(kM) == "3 3\n3 -5 7\n1 1 -7\n1 9 5\n");
    CHECK(parse_matrix(format_matrix(kM)) == kM);
    CHECK(parse_matrix("2 2\n1 0\n0 1") == IntMat::identity(2));
    CHECK(parse_matrix("  2   2 \n 1\t0\n0 1\n\n") == IntMat::identity(2));
    CHECK_THROWS_AS(parse_matrix("1 2\n5\n"), ParseError);
    CHECK_THROWS_AS(parse_matrix("1 1\n5 6\n"), ParseError);
    CHECK_THROWS_AS(parse_matrix("x 2\n1 2\n"), ParseError);
    CHECK_THROWS_AS(parse_matrix("2\n1 2\n"), ParseError);
    CHECK_THROWS_AS(parse_matrix("1 1\n1.5\n"), ParseError);
    CHECK_THROWS_AS(parse_matrix(""), ParseError);

    Rng rng(14);
    for (int t = 0; t < 20; ++t) {
        const IntMat a = random_matrix_bits(1 + rng.below(6), 300, rng);
        CHECK(parse_matrix(format_matrix(a)) == a);
    }
}

TEST_CASE("multiply and transpose")
{
    const IntMat b{{1, 2}, {3, 4}};
    CHECK(multiply(b, b) == IntMat{{7, 10}, {15, 22}});
    CHECK(transpose(b) == IntMat{{1, 3}, {2, 4}});
    CHECK(multiply(b, IntVec{1, -1}) == IntVec{-1, -1});
}

TEST_CASE("gen_structured without mixing is the Smith form")
{
    MatGenSpec spec;
    spec.n = 2;
    spec.num_nontrivial = 1;
    spec.entry_bits = 11;
    spec.forced_factor = 5;
    spec.mixing_rounds = 0;
    CHECK(gen_structured(spec) == IntMat{{1, 0}, {0, 5}});
}

TEST_CASE("gen_structured preserves |det| and is deterministic")
{
    MatGenSpec spec;
    spec.n = 3;
    spec.num_nontrivial = 2;
    spec.factor_bits = 3;
    spec.entry_bits = 40;
    spec.seed = 42;
    const GeneratedMatrix g = gen_structured_full(spec);
    const mpz_class p = static_cast<unsigned long>(g.factor);
    CHECK(mpz_probab_prime_p(p.get_mpz_t(), 30) > 0);
    CHECK(bitlen(p) == 3);
    CHECK(oracle::cofactor_det(g.matrix) == g.sign * p * p);
    CHECK(gen_structured(spec) == g.matrix);
    spec.seed = 43;
    CHECK_FALSE(gen_structured(spec) == g.matrix);
}

TEST_CASE("gen_structured Smith invariants match the prescribed tuple")
{
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        MatGenSpec spec;
        spec.n = 2 + seed % 5;
        spec.num_nontrivial = seed % (spec.n + 1);
        spec.factor_bits = 5;
        spec.entry_bits = 24;
        spec.seed = seed;
        const GeneratedMatrix g = gen_structured_full(spec);
        const auto s = oracle::smith_invariants(g.matrix);
        for (std::size_t i = 0; i < spec.n; ++i) {
            const unsigned long want = i < spec.n - spec.num_nontrivial ? 1 : g.factor;
            CHECK(s[i] == want);
        }
    }
}

TEST_CASE("gen_structured hits the entry-size window at benchmark scale")
{
    MatGenSpec spec;
    spec.n = 30;
    spec.num_nontrivial = 15;
    spec.factor_bits = 11;
    spec.entry_bits = 1000;
    spec.seed = 1;
    const GeneratedMatrix g = gen_structured_full(spec);
    const std::size_t bits = bitlen(maxentry(g.matrix));
    CHECK(bits >= 800);
    CHECK(bits <= 1200);
    CHECK(bitlen(mpz_class(static_cast<unsigned long>(g.factor))) == 11);
}

TEST_CASE("gen_structured rejects invalid specs")
{
    MatGenSpec spec;
    spec.n = 3;
    spec.num_nontrivial = 4;
    CHECK_THROWS_AS(gen_structured(spec), std::invalid_argument);
    spec.num_nontrivial = 1;
    spec.entry_bits = 5;
    spec.factor_bits = 11;
    CHECK_THROWS_AS(gen_structured(spec), std::invalid_argument);
    spec.n = 0;
    CHECK_THROWS_AS(gen_structured(spec), std::invalid_argument);
}

TEST_CASE("Rng bounded draws")
{
    Rng a(5), b(5);
    for (int i = 0; i < 100; ++i)
        CHECK(a.next() == b.next());
    Rng r(6);
    for (int i = 0; i < 1000; ++i) {
        CHECK(r.below(7) < 7);
        const auto v = r.range(-3, 3);
        CHECK(v >= -3);
        CHECK(v <= 3);
        CHECK(bitlen(r.bits(70)) <= 70);
    }
}
