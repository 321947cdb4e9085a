#pragma once

#include <stdexcept>

#include "nemthsim/field.hpp"

namespace nemthsim {

/// Ginzburg-Landau regularization parameter, or the renormalized limit system.
struct Regularization {
    bool limit = false;
    double eps = 0.25;

    static Regularization finite(double e) {
        if (e <= 0.0) throw std::invalid_argument("regularization: eps must be positive");
        return Regularization{false, e};
    }
    static Regularization limit_mode() { return Regularization{true, 0.0}; }

    bool operator==(const Regularization&) const = default;
};

/// One time level of the coupled system.
struct State {
    VectorField u;    // velocity (staggered on walls grids, collocated on periodic)
    ScalarField P;    // pressure
    DirectorField d;  // director, always 3 components
    ScalarField theta;
    double t = 0.0;
    Regularization reg;
};

/// Time stepping knobs. The stabilization constant must dominate 1/eps^2 for
/// the splitting of the Ginzburg-Landau force to be unconditionally stable.
struct StepParams {
    double dt = 1e-3;
    double stabilization = 0.0; // 0 = auto: 1/eps^2 (finite eps), 0 in limit mode
    double projection_tol = 1e-12;
    double cg_tol = 1e-12;
    int max_picard = 1;
    int max_cg_iter = 100000;

    void validate(const Regularization& reg) const {
        if (dt <= 0.0) throw std::invalid_argument("step params: dt must be positive");
        if (!reg.limit && stabilization != 0.0 && stabilization < 1.0 / (reg.eps * reg.eps))
            throw std::invalid_argument("step params: stabilization must be >= 1/eps^2");
        if (max_picard < 1) throw std::invalid_argument("step params: max_picard must be >= 1");
    }
    double effective_stabilization(const Regularization& reg) const {
        if (stabilization != 0.0) return stabilization;
        return reg.limit ? 0.0 : 1.0 / (reg.eps * reg.eps);
    }
};

} // namespace nemthsim
