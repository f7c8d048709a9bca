#include <doctest.h>

#include "detz/dixon.hpp"
#include "detz/generator.hpp"
#include "detz/hnf.hpp"
#include "oracles.hpp"

using namespace detz;

namespace {

const IntMat kM{{3, -5, 7}, {1, 1, -7}, {1, 9, 5}};

IntMat random_nonsingular(std::size_t n, long lo, long hi, Rng& rng)
{
    for (;;) {
        IntMat a = random_matrix(n, lo, hi, rng);
        if (oracle::bareiss_det(a) != 0)
            return a;
    }
}

}  // namespace

TEST_CASE("UpperTriangular validates its invariants")
{
    CHECK_NOTHROW(UpperTriangular(IntMat{{1, 5}, {0, 2}}));
    CHECK_THROWS_AS(UpperTriangular(IntMat{{1, 0}, {1, 2}}), std::invalid_argument);
    CHECK_THROWS_AS(UpperTriangular(IntMat{{0, 0}, {0, 2}}), std::invalid_argument);
    CHECK_THROWS_AS(UpperTriangular(IntMat{{-1, 0}, {0, 2}}), std::invalid_argument);
    CHECK_THROWS_AS(UpperTriangular(IntMat(2, 3)), std::invalid_argument);
    CHECK_FALSE(UpperTriangular(IntMat{{1, 5}, {0, 2}}).reduced());
    CHECK(UpperTriangular(IntMat{{1, 1}, {0, 2}}).reduced());
}

TEST_CASE("modular HNF of the worked example")
{
    const UpperTriangular h = modular_hnf(kM, 8);
    CHECK(h.matrix() == IntMat{{1, 1, 1}, {0, 8, 0}, {0, 0, 4}});
    CHECK(h.matrix() == oracle::stacked_hnf(kM, 8));
    CHECK(det_diag(h) == 32);
    const IntMat b = div_right_triangular(kM, h);
    CHECK(b == IntMat{{3, -1, 1}, {1, 0, -2}, {1, 1, 1}});
    CHECK(oracle::cofactor_det(b) == 10);
    CHECK(multiply(b, h.matrix()) == kM);
}

TEST_CASE("modular HNF small cases")
{
    CHECK(modular_hnf(IntMat{{6, 0}, {0, 4}}, 4).matrix() == IntMat{{2, 0}, {0, 4}});
    CHECK(modular_hnf(IntMat::identity(4), 97).matrix() == IntMat::identity(4));
    CHECK(modular_hnf(IntMat{{5, 3}, {2, 7}}, 1).matrix() == IntMat::identity(2));
    CHECK_THROWS_AS(modular_hnf(kM, 0), std::invalid_argument);
}

TEST_CASE("modular HNF matches the stacked-lattice oracle")
{
    Rng rng(41);
    for (int t = 0; t < 150; ++t) {
        const std::size_t n = 1 + rng.below(6);
        const IntMat a = random_nonsingular(n, -40, 40, rng);
        const mpz_class det = abs(oracle::bareiss_det(a));
        // Either a multiple of det, or an arbitrary modulus.
        const mpz_class d = t % 3 == 0 ? mpz_class(det * (1 + rng.below(5))) : mpz_class(1 + rng.below(500));
        const UpperTriangular h = modular_hnf(a, d);
        CHECK(h.matrix() == oracle::stacked_hnf(a, d));
        CHECK(h.reduced());
        if (t % 3 == 0) {
            // The lattice of A contains det * Z^n, so H is the HNF of A itself.
            CHECK(det_diag(h) == det);
            const IntMat b = div_right_triangular(a, h);
            CHECK(abs(oracle::bareiss_det(b)) == 1);
        }
    }
}

TEST_CASE("div_right_triangular exactness and parallel/serial agreement")
{
    Rng rng(42);
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 2 + rng.below(25);
        IntMat hm(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            hm(i, i) = 1 + rng.below(t % 2 ? 1000 : 2);
            for (std::size_t j = i + 1; j < n; ++j)
                if (rng.below(3) == 0)
                    hm(i, j) = rng.range(0, 50);
        }
        const UpperTriangular h(hm);
        const IntMat b = random_matrix_bits(n, 200, rng);
        const IntMat a = multiply(b, hm);
        CHECK(div_right_triangular(a, h) == b);
        CHECK(div_right_triangular_serial(a, h) == b);
    }
    const UpperTriangular h(IntMat{{2, 0}, {0, 3}});
    CHECK_THROWS_AS(div_right_triangular(IntMat{{1, 0}, {0, 3}}, h), NotDivisible);
    CHECK_THROWS_AS(div_right_triangular_serial(IntMat{{2, 0}, {0, 4}}, h), NotDivisible);
}

TEST_CASE("hcol_matrix examples")
{
    // Solution of M x = e1 has denominator 80; the sign of y does not
    // change the lattice.
    const UpperTriangular h = hcol_matrix(IntVec{-17, 3, -2}, 80);
    CHECK(h(0, 0) == 1);
    CHECK(h(1, 1) == 2);
    CHECK(h(2, 2) == 40);
    CHECK(det_diag(h) == 80);
    CHECK(h.matrix() == oracle::congruence_hnf(IntVec{-17, 3, -2}, 80));
    CHECK(h.matrix() == hcol_matrix(IntVec{17, -3, 2}, 80).matrix());
    const IntMat b = div_right_triangular(kM, h);
    CHECK(oracle::cofactor_det(b) * 80 == 320);

    CHECK(hcol_matrix(IntVec{1, 0}, 1).matrix() == IntMat::identity(2));
    CHECK(hcol_matrix(IntVec{0, 1}, 7).matrix() == IntMat{{1, 0}, {0, 7}});
    CHECK(hcol_matrix(IntVec{1, 0}, 7).matrix() == IntMat{{7, 0}, {0, 1}});
}

TEST_CASE("hcol_matrix matches the exhaustive congruence oracle")
{
    Rng rng(43);
    for (int t = 0; t < 150; ++t) {
        const std::size_t n = 1 + rng.below(3);
        const long d = 1 + static_cast<long>(rng.below(n == 3 ? 24 : 60));
        IntVec y(n);
        mpz_class g = d;
        do {
            g = d;
            for (auto& v : y) {
                v = rng.range(-200, 200);
                mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), v.get_mpz_t());
            }
        } while (g != 1);
        const UpperTriangular h = hcol_matrix(y, d);
        CHECK(h.matrix() == oracle::congruence_hnf(y, d));
        CHECK(det_diag(h) == d);
        CHECK(h.reduced());
    }
}

TEST_CASE("hcol_matrix divides A exactly after a rational solve")
{
    Rng rng(44);
    for (int t = 0; t < 40; ++t) {
        const std::size_t n = 2 + rng.below(5);
        const IntMat a = random_nonsingular(n, -60, 60, rng);
        IntVec b(n);
        for (auto& v : b)
            v = rng.range(-1000, 1000);
        const auto [y, d] = oracle::cramer_solve(a, b);
        const UpperTriangular h = hcol_matrix(y, d);
        const IntMat q = div_right_triangular(a, h);
        CHECK(oracle::cofactor_det(q) * d == oracle::cofactor_det(a));
        const mpz_class hd = det_diag(modular_hnf(a, d));
        CHECK(mpz_divisible_p(hd.get_mpz_t(), d.get_mpz_t()));
    }
}
