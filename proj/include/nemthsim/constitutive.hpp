#pragma once

#include "nemthsim/coefficients.hpp"
#include "nemthsim/ops.hpp"
#include "nemthsim/state.hpp"

namespace nemthsim {

/// Temperatures at or below this are rejected by the pointwise laws; the
/// heat minimum principle keeps admissible runs far above it.
inline constexpr double kThetaFloor = 1e-300;

void require_positive_theta(const ScalarField& theta, const char* what);

/// Ginzburg-Landau penalty F_eps(d) = (|d|^2 - 1)^2 / (4 eps^2), >= 0.
ScalarField gl_potential(const DirectorField& d, double eps);

/// Its d-gradient f_eps(d) = (|d|^2 - 1) d / eps^2; vanishes on the unit sphere.
DirectorField gl_force(const DirectorField& d, double eps);

/// Generalized Fourier law q = -k(theta) grad(theta) - h(theta)(grad(theta).d) d,
/// cell-centered with central gradients.
VectorField heat_flux(const ScalarField& theta, const DirectorField& d, const CoefficientSet& co);

/// Entropy flux g = q / theta (so q = theta * g identically).
VectorField entropy_flux(const ScalarField& theta, const DirectorField& d, const CoefficientSet& co);

/// Entropy density eta = 1 + ln(theta).
ScalarField entropy_density(const ScalarField& theta);

/// Pointwise thermodynamic potentials; e_int = psi + eta*theta holds cellwise.
struct ThermoFields {
    ScalarField psi;   // 0.5 |grad d|^2 + F_eps(d) - theta ln theta
    ScalarField e_int; // 0.5 |grad d|^2 + F_eps(d) + theta
    ScalarField eta;   // 1 + ln theta
};
ThermoFields free_energy_density(const State& s);

/// Delta d - f_eps(d) (finite eps) or Delta d + |grad d|^2 d (limit mode);
/// the director relaxation rate whose square enters every dissipation ledger.
DirectorField director_tension(const DirectorField& d, const Regularization& reg);

/// Entropy production in the expanded sum-of-squares form
///   (1/theta) (mu|grad u|^2 + |tension|^2 + k|grad theta|^2 + h|grad theta . d|^2),
/// nonnegative cell by cell by construction.
ScalarField entropy_production(const State& s, const CoefficientSet& co);

/// Energy flux Sigma = P u - mu(theta) (grad u)^T u + (grad d o grad d) u
///                     - (grad d)^T (Dd/Dt), cell-centered.
VectorField sigma_flux(const State& s, const DirectorField& d_material_derivative,
                       const CoefficientSet& co);

} // namespace nemthsim
