#include "nemthsim/coefficients.hpp"

#include <algorithm>
#include <cmath>

namespace nemthsim {

double CoefficientSpec::eval(double theta) const {
    switch (kind) {
        case CoeffKind::constant: return c0;
        case CoeffKind::affine_clamped: return std::clamp(c0 + c1 * theta, lo, hi);
        case CoeffKind::rational: return c0 + c1 / (1.0 + theta);
    }
    return c0;
}

double CoefficientSpec::lower_bound() const {
    switch (kind) {
        case CoeffKind::constant: return c0;
        case CoeffKind::affine_clamped: return lo;
        case CoeffKind::rational: return c0;
    }
    return c0;
}

double CoefficientSpec::upper_bound() const {
    switch (kind) {
        case CoeffKind::constant: return c0;
        case CoeffKind::affine_clamped: return hi;
        case CoeffKind::rational: return c0 + c1;
    }
    return c0;
}

CoefficientSpec CoefficientSpec::constant(double c) {
    if (c <= 0.0) throw std::invalid_argument("coefficient: constant must be positive");
    CoefficientSpec s;
    s.kind = CoeffKind::constant;
    s.c0 = c;
    return s;
}

CoefficientSpec CoefficientSpec::affine_clamped(double a, double b, double lo, double hi) {
    if (lo <= 0.0 || hi < lo) throw std::invalid_argument("coefficient: need 0 < lo <= hi");
    CoefficientSpec s;
    s.kind = CoeffKind::affine_clamped;
    s.c0 = a;
    s.c1 = b;
    s.lo = lo;
    s.hi = hi;
    return s;
}

CoefficientSpec CoefficientSpec::rational(double c0, double c1) {
    if (c0 <= 0.0 || c1 < 0.0) throw std::invalid_argument("coefficient: rational needs c0 > 0, c1 >= 0");
    CoefficientSpec s;
    s.kind = CoeffKind::rational;
    s.c0 = c0;
    s.c1 = c1;
    return s;
}

namespace {
void verify_bounds(const CoefficientSpec& s, double lo, double hi, const char* name) {
    // log-spaced sweep over the admissible temperature range
    for (int i = 0; i <= 240; ++i) {
        double theta = std::pow(10.0, -6.0 + i * 0.05);
        double v = s.eval(theta);
        if (!(v >= lo - 1e-14 && v <= hi + 1e-14))
            throw std::invalid_argument(std::string("coefficient ") + name + " violates its declared bounds");
    }
}
} // namespace

CoefficientSet::CoefficientSet(const CoefficientSpec& mu_, const CoefficientSpec& k_, const CoefficientSpec& h_)
    : mu(mu_), k(k_), h(h_) {
    mu_low = mu.lower_bound();
    mu_high = mu.upper_bound();
    k_low = std::min(k.lower_bound(), h.lower_bound());
    k_high = std::max(k.upper_bound(), h.upper_bound());
    if (mu_low <= 0.0 || k_low <= 0.0)
        throw std::invalid_argument("coefficient bounds must be strictly positive");
    verify_bounds(mu, mu_low, mu_high, "mu");
    verify_bounds(k, k_low, k_high, "k");
    verify_bounds(h, k_low, k_high, "h");
}

} // namespace nemthsim
