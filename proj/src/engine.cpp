#include "detz/engine.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>
#include <stdexcept>

#include "detz/dixon.hpp"
#include "detz/generator.hpp"
#include "detz/hnf.hpp"
#include "detz/modular.hpp"
#include "detz/primes.hpp"
#include "detz/unimodular.hpp"

namespace detz {

std::string_view strategy_name(Strategy s)
{
    switch (s) {
    case Strategy::Auto:
        return "auto";
    case Strategy::CrtOnly:
        return "crt_only";
    case Strategy::Abm:
        return "abm";
    case Strategy::HcolOnly:
        return "hcol_only";
    }
    return "?";
}

Strategy parse_strategy(std::string_view name)
{
    for (Strategy s : {Strategy::Auto, Strategy::CrtOnly, Strategy::Abm, Strategy::HcolOnly})
        if (strategy_name(s) == name)
            return s;
    throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
}

void EngineConfig::validate() const
{
    if (hnf_threshold_bits == 0 || crt_finish_threshold_bits == 0 || crt_stable_window_bits == 0)
        throw std::invalid_argument("EngineConfig: thresholds must be positive");
    if (prime_bits != 62)
        throw std::invalid_argument("EngineConfig: only 62-bit primes are supported");
}

namespace {

constexpr int kDixonAttempts = 5;

std::string bits_str(const mpz_class& x)
{
    return std::to_string(bitlen(x)) + " bits";
}

class Engine {
public:
    Engine(const IntMat& a, const EngineConfig& cfg, DetStats& st)
        : a_(a), cfg_(cfg), st_(st), rng_(cfg.seed)
    {
    }

    mpz_class run()
    {
        mpz_class det = run_impl();
        st_.crt_primes = acc_.primes().size();
        return det;
    }

private:
    struct Candidate {
        mpz_class d;
        bool stable = false;
        std::size_t primes = 0;
    };

    void note(const std::string& s) { st_.log.push_back(s); }

    // det(A_cur) candidate from the residues of det(A) at primes not dividing D.
    Candidate candidate() const
    {
        const auto view = acc_.coprime_view(d_);
        Candidate c;
        c.primes = view.primes.size();
        if (c.primes == 0)
            return c;
        mpz_class inv;
        mpz_invert(inv.get_mpz_t(), d_.get_mpz_t(), view.m.get_mpz_t());
        c.d = symmetric_remainder(view.r * inv, view.m);
        c.stable = crt_stable(c.d, view.m, cfg_.crt_stable_window_bits);
        return c;
    }

    // det(A) = dtot * t with |t| < 2^(h - bitlen(dtot)); recover t from
    // enough residues at primes coprime to dtot.
    mpz_class crt_finish(const mpz_class& dtot)
    {
        const std::size_t dbits = bitlen(dtot);
        const std::size_t target = (h_ > dbits ? h_ - dbits : 0) + 2;
        crt_extend(acc_, a_, target, dtot, primes_);
        const auto view = acc_.coprime_view(dtot);
        mpz_class inv;
        mpz_invert(inv.get_mpz_t(), dtot.get_mpz_t(), view.m.get_mpz_t());
        const mpz_class t = symmetric_remainder(view.r * inv, view.m);
        note("crt finish: divisor " + bits_str(dtot) + ", modulus " + bits_str(view.m));
        return dtot * t;
    }

    RationalSolution dixon(const IntMat& a)
    {
        IntVec b(a.rows());
        for (auto& v : b)
            v = mpz_class(std::to_string(rng_.range(-(std::int64_t{1} << 62), (std::int64_t{1} << 62) - 1)));
        for (int attempt = 0; attempt < kDixonAttempts; ++attempt) {
            const std::uint64_t p = primes_.next();
            try {
                RationalSolution s = solve_rational(a, b, p);
                ++st_.dixon_solves;
                note("solve: denominator " + bits_str(s.d));
                return s;
            } catch (const SingularModP&) {
                note("solve: singular modulo " + std::to_string(p));
            }
        }
        throw ProbablySingular("matrix singular modulo " + std::to_string(kDixonAttempts) + " primes");
    }

    void divide(const UpperTriangular& h, const mpz_class& factor)
    {
        cur_ = div_right_triangular(cur_, h);
        d_ *= factor;
        if (cfg_.check_invariants)
            check_invariant();
    }

    void check_invariant()
    {
        for (;;) {
            const std::uint64_t q = check_primes_.next();
            const std::uint64_t dq = mpz_fdiv_ui(d_.get_mpz_t(), q);
            if (dq == 0)
                continue;
            const auto lhs = static_cast<std::uint64_t>(
                static_cast<unsigned __int128>(det_mod_p(cur_, q)) * dq % q);
            if (lhs != det_mod_p(a_, q))
                throw std::logic_error("engine invariant D * det(A_cur) = det(A) violated");
            return;
        }
    }

    mpz_class run_crt_only()
    {
        crt_extend(acc_, a_, h_ + 1, 0, primes_);
        note("crt to Hadamard bound: " + std::to_string(acc_.primes().size()) + " primes");
        return acc_.symmetric();
    }

    mpz_class run_impl();
    mpz_class run_loop();

    const IntMat& a_;
    const EngineConfig& cfg_;
    DetStats& st_;
    Rng rng_;
    PrimeStream primes_;
    PrimeStream check_primes_;
    CrtAccumulator acc_;
    IntMat cur_;
    mpz_class d_ = 1;
    std::size_t h_ = 0;
};

mpz_class Engine::run_impl()
{
    const std::size_t n = a_.rows();
    if (n == 1) {
        note("direct: 1x1");
        return a_(0, 0);
    }
    if (n == 2) {
        note("direct: 2x2");
        return a_(0, 0) * a_(1, 1) - a_(0, 1) * a_(1, 0);
    }
    h_ = hadamard_bits(a_);
    const std::size_t e = maxentry_log2_ceil(a_);
    note("bounds: e = " + std::to_string(e) + ", h = " + std::to_string(h_));

    if (cfg_.strategy == Strategy::CrtOnly)
        return run_crt_only();

    CrtCandidate cand = crt_det_candidate(a_, e, cfg_.crt_stable_window_bits, primes_);
    acc_ = std::move(cand.acc);
    note("candidate: " + bits_str(cand.d) + " from " + std::to_string(acc_.primes().size()) + " primes");

    if (cfg_.strategy == Strategy::Abm) {
        const RationalSolution s = dixon(a_);
        return crt_finish(s.d);
    }
    cur_ = a_;
    return run_loop();
}

mpz_class Engine::run_loop()
{
    const std::size_t n = a_.rows();
    const std::size_t limit = cfg_.max_iterations ? cfg_.max_iterations : std::max<std::size_t>(4 * n, 16);
    const bool use_hnf = cfg_.strategy == Strategy::Auto;
    for (std::size_t it = 0; it < limit; ++it) {
        ++st_.iterations;
        const Candidate c = candidate();
        std::ostringstream head;
        head << "iter " << it + 1 << ": D " << bits_str(d_) << ", candidate " << bits_str(c.d)
             << (c.stable ? " (stable)" : "");
        note(head.str());

        if (c.stable && c.d == 0) {
            if (c.primes < 2) {
                const std::size_t have = bitlen(acc_.coprime_view(d_).m);
                crt_extend(acc_, a_, have + 1, d_, primes_);
                continue;
            }
            if (!cfg_.prove_zero)
                throw ProbablySingular("determinant candidate is a stable zero");
            note("zero candidate: certifying by CRT");
            return crt_finish(d_);
        }

        if (abs(c.d) == 1) {
            ++st_.unimodular_checks;
            const UnimodResult u = verify_unimodular(cur_);
            note(std::string("verify: ") + (u.unimodular ? "unimodular" : "not unimodular"));
            if (u.unimodular)
                return u.sign * d_;
        }

        if (use_hnf && c.stable && abs(c.d) > 1 && bitlen(c.d) < cfg_.hnf_threshold_bits) {
            const UpperTriangular h = modular_hnf(cur_, abs(c.d));
            const mpz_class dh = det_diag(h);
            note("hnf mod candidate: factor " + bits_str(dh));
            if (dh != 1) {
                ++st_.hnf_divisions;
                divide(h, dh);
                continue;
            }
        }

        const RationalSolution sol = dixon(cur_);
        const mpz_class dtot = d_ * sol.d;
        const long room = static_cast<long>(h_) - static_cast<long>(bitlen(dtot));
        if (sol.d == 1 || room < static_cast<long>(cfg_.crt_finish_threshold_bits))
            return crt_finish(dtot);

        if (use_hnf && bitlen(sol.d) < cfg_.hnf_threshold_bits) {
            const UpperTriangular h = modular_hnf(cur_, sol.d);
            const mpz_class dh = det_diag(h);
            note("hnf mod denominator: factor " + bits_str(dh));
            ++st_.hnf_divisions;
            divide(h, dh);
            continue;
        }

        const UpperTriangular hx = hcol_matrix(sol.y, sol.d);
        note("hcol: factor " + bits_str(sol.d));
        ++st_.hcol_divisions;
        divide(hx, sol.d);
    }
    throw IterationLimit("determinant: iteration limit reached");
}

}  // namespace

DetReport determinant_report(const IntMat& a, const EngineConfig& config)
{
    if (!a.square() || a.rows() == 0)
        throw std::invalid_argument("determinant: matrix must be square and non-empty");
    config.validate();
    DetReport r;
    Engine eng(a, config, r.stats);
    r.det = eng.run();
    return r;
}

mpz_class determinant(const IntMat& a, const EngineConfig& config)
{
    return determinant_report(a, config).det;
}

mpz_class determinant_with_strategy(const IntMat& a, Strategy strategy, std::uint64_t seed)
{
    EngineConfig cfg;
    cfg.strategy = strategy;
    cfg.seed = seed;
    return determinant(a, cfg);
}

HnfCalibration calibrate_hnf_cost()
{
    constexpr std::size_t n = 32;
    constexpr std::size_t d_bits = 640;
    Rng rng(0xc0ffee);
    const IntMat a = random_matrix_bits(n, 64, rng);
    const mpz_class d = rng.bits(d_bits) | (mpz_class(1) << (d_bits - 1));
    double best = 1e300;
    for (int rep = 0; rep < 3; ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        (void)modular_hnf(a, d);
        const std::chrono::duration<double, std::milli> dt = std::chrono::steady_clock::now() - t0;
        best = std::min(best, dt.count());
    }
    const double steps = static_cast<double>(n * n * n) * (static_cast<double>(d_bits) / 64.0);
    return {best / steps};
}

double estimate_hnf_cost(std::size_t n, std::size_t d_bits, const HnfCalibration& calib)
{
    const double nn = static_cast<double>(n);
    return calib.ms_per_step * nn * nn * nn * std::max(1.0, static_cast<double>(d_bits) / 64.0);
}

}  // namespace detz
