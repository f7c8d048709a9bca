// Serial reference kernels against their OpenMP versions. Prints one CSV row
// per kernel with the median time of each and checks that outputs agree.

#include <algorithm>
#include <chrono>
#include <functional>
#include <iostream>
#include <vector>

#include <CLI11.hpp>

#include "detz/generator.hpp"
#include "detz/hnf.hpp"
#include "detz/modular.hpp"
#include "detz/parallel.hpp"
#include "detz/primes.hpp"
#include "detz/rns.hpp"

using namespace detz;

namespace {

double median_ms(int reps, const std::function<void()>& f)
{
    f();
    std::vector<double> t;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        t.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    }
    std::sort(t.begin(), t.end());
    return t[t.size() / 2];
}

bool same(const rns::ResidueMatrix& a, const rns::ResidueMatrix& b)
{
    for (std::size_t k = 0; k < a.basis().size(); ++k)
        if (!std::equal(a.slice(k), a.slice(k) + a.slice_size(), b.slice(k)))
            return false;
    return true;
}

struct Row {
    const char* kernel;
    std::size_t n;
    double serial, parallel;
    bool agree;
};

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Serial vs parallel kernel timings"};
    std::size_t n = 120;
    int reps = 5;
    int threads = 0;
    app.add_option("-n", n, "Matrix dimension");
    app.add_option("--reps", reps, "Timed repetitions");
    app.add_option("--threads", threads, "Worker threads for the parallel kernels");
    CLI11_PARSE(app, argc, argv);
    set_threads(threads);

    Rng rng(99);
    std::vector<Row> rows;

    {
        const IntMat a = random_matrix_bits(n, 1000, rng);
        PrimeStream ps;
        std::vector<std::uint64_t> primes;
        for (int i = 0; i < 16; ++i)
            primes.push_back(ps.next());
        std::vector<std::uint64_t> s, p;
        const double ts = median_ms(reps, [&] { s = det_mod_p_batch_serial(a, primes); });
        const double tp = median_ms(reps, [&] { p = det_mod_p_batch(a, primes); });
        rows.push_back({"det_mod_p_batch(16 primes)", n, ts, tp, s == p});
    }
    {
        const rns::Basis basis(small_primes(64));
        const auto a = rns::to_residues(random_matrix_bits(n, 600, rng), basis);
        const auto b = rns::to_residues(random_matrix_bits(n, 600, rng), basis);
        rns::ResidueMatrix s, p;
        const double ts = median_ms(reps, [&] { s = rns::matmul_serial(a, b); });
        const double tp = median_ms(reps, [&] { p = rns::matmul(a, b); });
        rows.push_back({"rns::matmul(64 primes)", n, ts, tp, same(s, p)});
    }
    {
        const rns::Basis from(small_primes(64)), to(small_primes(64, 64));
        const rns::Extender ext(from, to);
        const auto x = rns::to_residues(random_matrix_bits(n, 1000, rng), from);
        rns::ResidueMatrix s, p;
        const double ts = median_ms(reps, [&] { s = ext.apply_serial(x); });
        const double tp = median_ms(reps, [&] { p = ext.apply(x); });
        rows.push_back({"rns::Extender(64 -> 64)", n, ts, tp, same(s, p)});
    }
    {
        MatGenSpec spec;
        spec.n = n;
        spec.num_nontrivial = n / 2;
        spec.factor_bits = 11;
        spec.entry_bits = 1000;
        const GeneratedMatrix g = gen_structured_full(spec);
        const UpperTriangular h = modular_hnf(g.matrix, mpz_class(static_cast<unsigned long>(g.factor)));
        IntMat s, p;
        const double ts = median_ms(reps, [&] { s = div_right_triangular_serial(g.matrix, h); });
        const double tp = median_ms(reps, [&] { p = div_right_triangular(g.matrix, h); });
        rows.push_back({"div_right_triangular", n, ts, tp, s == p});
    }

    std::cout << "# threads=" << current_threads() << " reps=" << reps << '\n'
              << "kernel,n,serial_ms,parallel_ms,speedup,agree\n";
    bool ok = true;
    for (const Row& r : rows) {
        std::cout << r.kernel << ',' << r.n << ',' << r.serial << ',' << r.parallel << ','
                  << r.serial / r.parallel << ',' << (r.agree ? "yes" : "no") << '\n';
        ok = ok && r.agree;
    }
    return ok ? 0 : 1;
}
