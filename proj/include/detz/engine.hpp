#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "detz/intmat.hpp"

namespace detz {

class ProbablySingular : public Error {
public:
    using Error::Error;
};

class IterationLimit : public Error {
public:
    using Error::Error;
};

enum class Strategy { Auto, CrtOnly, Abm, HcolOnly };

std::string_view strategy_name(Strategy s);
/// Throws std::invalid_argument for unknown names.
Strategy parse_strategy(std::string_view name);

struct EngineConfig {
    std::size_t hnf_threshold_bits = 4096;
    std::size_t crt_finish_threshold_bits = 1280;
    std::size_t crt_stable_window_bits = 60;
    std::size_t prime_bits = 62;
    std::uint64_t seed = 1;
    /// 0 selects max(4n, 16).
    std::size_t max_iterations = 0;
    Strategy strategy = Strategy::Auto;
    /// Certify a stable zero candidate by CRT up to the Hadamard bound instead
    /// of raising ProbablySingular.
    bool prove_zero = false;
    /// Check D * det(A_cur) = det(A) modulo a fresh prime after every update.
    bool check_invariants = false;

    void validate() const;
};

struct DetStats {
    std::size_t iterations = 0;
    std::size_t crt_primes = 0;        // residues accumulated for det(A)
    std::size_t dixon_solves = 0;
    std::size_t hnf_divisions = 0;
    std::size_t hcol_divisions = 0;
    std::size_t unimodular_checks = 0;
    std::vector<std::string> log;      // one line per decision
};

struct DetReport {
    mpz_class det;
    DetStats stats;
};

DetReport determinant_report(const IntMat& a, const EngineConfig& config = {});

mpz_class determinant(const IntMat& a, const EngineConfig& config = {});

mpz_class determinant_with_strategy(const IntMat& a, Strategy strategy, std::uint64_t seed = 1);

/// Cost model for one modular HNF: c * n^3 * max(1, d_bits / 64), c in
/// milliseconds per word-size elimination step.
struct HnfCalibration {
    double ms_per_step = 1e-5;
};

/// Times a small modular HNF on this machine to fit ms_per_step.
HnfCalibration calibrate_hnf_cost();

double estimate_hnf_cost(std::size_t n, std::size_t d_bits, const HnfCalibration& calib);

}  // namespace detz
