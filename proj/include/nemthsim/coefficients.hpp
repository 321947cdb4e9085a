#pragma once

#include <stdexcept>
#include <string>

namespace nemthsim {

/// Temperature-dependent material function presets. All three induce bounded,
/// Lipschitz, strictly positive functions on theta > 0 by construction.
enum class CoeffKind { constant, affine_clamped, rational };

struct CoefficientSpec {
    CoeffKind kind = CoeffKind::constant;
    // constant:        value = c0
    // affine_clamped:  value = clamp(c0 + c1*theta, lo, hi)
    // rational:        value = c0 + c1/(1 + theta)
    double c0 = 1.0, c1 = 0.0, lo = 0.0, hi = 0.0;

    double eval(double theta) const;
    double lower_bound() const;
    double upper_bound() const;

    static CoefficientSpec constant(double c);
    static CoefficientSpec affine_clamped(double a, double b, double lo, double hi);
    static CoefficientSpec rational(double c0, double c1);

    bool operator==(const CoefficientSpec&) const = default;
};

/// The material functions mu, k, h with certified positive bounds
/// mu_low <= mu <= mu_high and k_low <= k, h <= k_high. Bounds are checked by
/// sampling theta over [1e-6, 1e6] on construction.
struct CoefficientSet {
    CoefficientSpec mu, k, h;
    double mu_low = 0, mu_high = 0, k_low = 0, k_high = 0;

    CoefficientSet() = default;
    CoefficientSet(const CoefficientSpec& mu_, const CoefficientSpec& k_, const CoefficientSpec& h_);
};

} // namespace nemthsim
