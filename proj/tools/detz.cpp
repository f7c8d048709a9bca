// detz command-line interface: det, gen, bench, verify.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "detz/engine.hpp"
#include "detz/generator.hpp"
#include "detz/intmat.hpp"
#include "detz/parallel.hpp"
#include "detz/unimodular.hpp"

namespace {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kParseError = 2,
    kSingular = 3,
    kDisagreement = 4,
};

std::uint64_t hash64(const mpz_class& x)
{
    // det mod 2^64 as an unsigned residue.
    mpz_class r;
    mpz_fdiv_r_2exp(r.get_mpz_t(), x.get_mpz_t(), 64);
    std::uint64_t v = 0;
    mpz_export(&v, nullptr, -1, sizeof v, 0, 0, r.get_mpz_t());
    return v;
}

struct DetArgs {
    std::string path;
    bool stats = false;
    std::uint64_t seed = 1;
    int threads = 0;
    std::size_t hnf_threshold = 4096;
    std::size_t crt_threshold = 1280;
    std::string strategy = "auto";
    bool prove_zero = false;
};

int cmd_det(const DetArgs& args)
{
    const detz::IntMat a = detz::read_matrix_file(args.path);
    if (!a.square())
        throw detz::ParseError("matrix is not square");
    detz::EngineConfig cfg;
    cfg.seed = args.seed;
    cfg.hnf_threshold_bits = args.hnf_threshold;
    cfg.crt_finish_threshold_bits = args.crt_threshold;
    cfg.strategy = detz::parse_strategy(args.strategy);
    cfg.prove_zero = args.prove_zero;
    const auto t0 = std::chrono::steady_clock::now();
    const detz::DetReport r = detz::determinant_report(a, cfg);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    std::cout << r.det.get_str() << '\n';
    if (args.stats) {
        const auto& s = r.stats;
        std::cerr << "strategy " << args.strategy << ", " << dt.count() << " s, threads "
                  << detz::current_threads() << '\n'
                  << "iterations " << s.iterations << ", crt primes " << s.crt_primes << ", solves "
                  << s.dixon_solves << ", hnf divisions " << s.hnf_divisions << ", hcol divisions "
                  << s.hcol_divisions << ", unimodular checks " << s.unimodular_checks << '\n';
        for (const auto& line : s.log)
            std::cerr << "  " << line << '\n';
    }
    return kOk;
}

struct GenArgs {
    std::size_t n = 0;
    std::size_t entry_bits = 1000;
    std::optional<std::size_t> nontrivial;
    std::size_t factor_bits = 11;
    std::uint64_t seed = 1;
    std::string out;
};

detz::MatGenSpec make_spec(std::size_t n, std::size_t entry_bits, std::size_t nontrivial, std::size_t factor_bits,
                           std::uint64_t seed)
{
    detz::MatGenSpec spec;
    spec.n = n;
    spec.entry_bits = entry_bits;
    spec.num_nontrivial = nontrivial;
    spec.factor_bits = factor_bits;
    spec.seed = seed;
    return spec;
}

int cmd_gen(const GenArgs& args)
{
    const auto spec = make_spec(args.n, args.entry_bits, args.nontrivial.value_or(args.n / 2), args.factor_bits,
                                args.seed);
    const detz::IntMat a = detz::gen_structured(spec);
    if (args.out.empty() || args.out == "-")
        std::cout << detz::format_matrix(a);
    else
        detz::write_matrix_file(args.out, a);
    return kOk;
}

struct BenchArgs {
    std::vector<std::size_t> dims{30, 60, 120};
    std::vector<std::string> strategies{"auto", "crt_only", "abm", "hcol_only"};
    std::uint64_t seed = 1;
    int reps = 3;
    std::size_t entry_bits = 1000;
    std::size_t factor_bits = 11;
};

int cmd_bench(const BenchArgs& args)
{
    std::vector<detz::Strategy> strategies;
    for (const auto& s : args.strategies)
        strategies.push_back(detz::parse_strategy(s));
    if (args.reps < 1)
        throw std::invalid_argument("--reps must be positive");

    std::cout << "# detz bench: median of " << args.reps << " wall-clock runs after one warm-up\n"
              << "# threads=" << detz::current_threads() << " seed=" << args.seed << '\n'
              << "strategy,n,entry_bits,num_nontrivial,seconds,hash\n";
    bool agree = true;
    for (std::size_t n : args.dims) {
        const auto spec = make_spec(n, args.entry_bits, n / 2, args.factor_bits, args.seed);
        const detz::IntMat a = detz::gen_structured(spec);
        std::optional<std::uint64_t> first;
        for (detz::Strategy s : strategies) {
            detz::EngineConfig cfg;
            cfg.strategy = s;
            cfg.seed = args.seed;
            mpz_class det = detz::determinant(a, cfg);  // warm-up
            std::vector<double> times;
            for (int r = 0; r < args.reps; ++r) {
                const auto t0 = std::chrono::steady_clock::now();
                det = detz::determinant(a, cfg);
                const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
                times.push_back(dt.count());
            }
            std::sort(times.begin(), times.end());
            const std::uint64_t h = hash64(det);
            if (first && *first != h)
                agree = false;
            first = first.value_or(h);
            std::cout << detz::strategy_name(s) << ',' << n << ',' << args.entry_bits << ',' << n / 2 << ','
                      << times[times.size() / 2] << ',' << h << std::endl;
        }
    }
    if (!agree) {
        std::cerr << "detz: strategies disagree\n";
        return kDisagreement;
    }
    return kOk;
}

int cmd_verify(const std::string& path)
{
    const detz::IntMat a = detz::read_matrix_file(path);
    if (!a.square())
        throw detz::ParseError("matrix is not square");
    const detz::UnimodResult r = detz::verify_unimodular(a);
    if (r.unimodular)
        std::cout << "unimodular " << (r.sign > 0 ? "+1" : "-1") << '\n';
    else
        std::cout << "not unimodular\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Exact determinants of dense integer matrices"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (default: DETZ_THREADS or all cores)");

    DetArgs det;
    auto* det_cmd = app.add_subcommand("det", "Print the determinant of a matrix file");
    det_cmd->add_option("file", det.path, "Matrix file")->required();
    det_cmd->add_flag("--stats", det.stats, "Print the iteration log to stderr");
    det_cmd->add_option("--seed", det.seed, "Seed for the random right-hand sides");
    det_cmd->add_option("--threads", threads, "Worker threads");
    det_cmd->add_option("--hnf-threshold", det.hnf_threshold, "Largest modulus (bits) for a modular HNF");
    det_cmd->add_option("--crt-threshold", det.crt_threshold, "Remaining bits below which CRT finishes");
    det_cmd->add_option("--strategy", det.strategy, "auto|crt_only|abm|hcol_only")
        ->check(CLI::IsMember({"auto", "crt_only", "abm", "hcol_only"}));
    det_cmd->add_flag("--prove-zero", det.prove_zero, "Certify a zero determinant instead of failing");

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "Write a structured benchmark matrix");
    gen_cmd->add_option("-n,--n", gen.n, "Dimension")->required()->check(CLI::PositiveNumber);
    gen_cmd->add_option("--entry-bits", gen.entry_bits, "Target entry size in bits");
    gen_cmd->add_option("--nontrivial", gen.nontrivial, "Number of non-trivial invariant factors (default n/2)");
    gen_cmd->add_option("--factor-bits", gen.factor_bits, "Bit size of the invariant-factor prime");
    gen_cmd->add_option("--seed", gen.seed, "Generator seed");
    gen_cmd->add_option("-o,--out", gen.out, "Output file (default stdout)");

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Race strategies on structured matrices, CSV to stdout");
    bench_cmd->add_option("--dims", bench.dims, "Dimensions")->delimiter(',');
    bench_cmd->add_option("--strategies", bench.strategies, "Strategies")->delimiter(',');
    bench_cmd->add_option("--seed", bench.seed, "Generator and engine seed");
    bench_cmd->add_option("--reps", bench.reps, "Timed repetitions per case");
    bench_cmd->add_option("--entry-bits", bench.entry_bits, "Target entry size in bits");
    bench_cmd->add_option("--factor-bits", bench.factor_bits, "Bit size of the invariant-factor prime");
    bench_cmd->add_option("--threads", threads, "Worker threads");

    std::string verify_path;
    auto* verify_cmd = app.add_subcommand("verify", "Decide whether a matrix is unimodular");
    verify_cmd->add_option("file", verify_path, "Matrix file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kParseError;
    }

    detz::set_threads(threads);
    try {
        if (*det_cmd)
            return cmd_det(det);
        if (*gen_cmd)
            return cmd_gen(gen);
        if (*bench_cmd)
            return cmd_bench(bench);
        if (*verify_cmd)
            return cmd_verify(verify_path);
    } catch (const detz::ParseError& e) {
        std::cerr << "detz: " << e.what() << '\n';
        return kParseError;
    } catch (const detz::ProbablySingular& e) {
        std::cerr << "detz: " << e.what() << '\n';
        return kSingular;
    } catch (const std::exception& e) {
        std::cerr << "detz: " << e.what() << '\n';
        return kFailure;
    }
    return kFailure;
}
