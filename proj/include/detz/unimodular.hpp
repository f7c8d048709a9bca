#pragma once

#include "detz/intmat.hpp"

namespace detz {

/// Verdict of a unimodularity check. When `unimodular` holds, det = sign.
struct UnimodResult {
    bool unimodular = false;
    int sign = 0;

    static UnimodResult yes(int s) { return {true, s}; }
    static UnimodResult no() { return {false, 0}; }
    friend bool operator==(const UnimodResult&, const UnimodResult&) = default;
};

struct UnimodStats {
    std::size_t lift_steps = 0;      // squaring steps of the residual
    std::size_t x_primes = 0;        // size of the lifting modulus basis
    std::size_t aux_primes = 0;      // size of the auxiliary basis
    bool quick_reject = false;       // rejected by the determinant residue
    bool used_reference = false;     // fell back to verify_unimodular_reference
};

/// Decides det(a) = +-1 with a certain answer. A residue of det(a) rejects
/// most inputs; the rest are decided by lifting the inverse X-adically with
/// the residual R_{i+1} = (R_i^2 - A M_i) / X held in two residue bases: a
/// zero residual proves A^{-1} integral, and a non-zero residual once
/// X^(2^i - 1) exceeds four times the adjugate bound proves it is not.
UnimodResult verify_unimodular(const IntMat& a, UnimodStats* stats = nullptr);

/// Plain p-adic inverse lift to p^k > 2 beta followed by a modular check of
/// A B = I against a proven bound. O(n^3) big-integer work per lifting step.
UnimodResult verify_unimodular_reference(const IntMat& a);

}  // namespace detz
