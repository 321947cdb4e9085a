#pragma once

#include <utility>

#include "nemthsim/coefficients.hpp"
#include "nemthsim/constitutive.hpp"
#include "nemthsim/errors.hpp"
#include "nemthsim/linsolve.hpp"
#include "nemthsim/ops.hpp"
#include "nemthsim/state.hpp"

namespace nemthsim {

/// What one coupled step actually injected and dissipated; the energy and
/// heat-balance audits check against these recorded values, not recomputed
/// approximations.
struct StepInfo {
    double source_total = 0.0;          // integral of the heat sources added this step
    double viscous_dissipation = 0.0;   // integral mu(theta_coeff) |grad u_new|^2, face quadrature
    double director_dissipation = 0.0;  // integral |tension(d_new)|^2
    int picard_iterations = 1;
    int cg_iterations = 0;              // summed over all solves of the step
};

/// One semi-implicit step of the transported Ginzburg-Landau director flow:
/// (d* - d^n)/dt + w.grad d^n = Lap d* - f_eps(d^n) - S (d* - d^n),
/// Neumann ghosts on walls. w must be discretely divergence-free.
DirectorField director_step(const State& s, const VectorField& w, const StepParams& p);

/// Harmonic-map-flow step with explicit |grad d|^2 d, implicit Laplacian,
/// followed by pointwise renormalization; |d|=1 is preserved exactly.
/// Aborts if |d| drops below 0.5 anywhere before renormalization.
DirectorField limit_director_step(const State& s, const VectorField& w, const StepParams& p);

/// Explicit skew-form convection and elastic force -(grad d)^T tension(d),
/// implicit variable-viscosity diffusion with mu(theta), then projection.
/// The state's director is the one the force is assembled from (the caller
/// passes the already-updated director when stepping the coupled system).
/// Returns (u, P).
std::pair<VectorField, ScalarField> momentum_step(const State& s, const CoefficientSet& co,
                                                  const StepParams& p, StepInfo* info = nullptr);

/// Leray projection: u = u* - grad(phi), Lap(phi) = div(u*), Neumann walls or
/// periodic. Returns (u, phi); phi is the pressure increment (P = phi/dt).
std::pair<VectorField, ScalarField> project_divergence_free(const VectorField& u_star,
                                                            const StepParams& p);

/// Monotone theta update: conservative upwind transport by u_new, implicit
/// anisotropic diffusion with the tensor k(theta^n) I + h(theta^n) d x d in a
/// directionally split, flux-exact form, and explicit nonnegative sources
/// mu(theta^n)|grad u_new|^2 + |tension(d_new)|^2. No-flux walls are imposed
/// on every flux crossing the boundary.
ScalarField heat_step(const State& s, const VectorField& u_new, const DirectorField& d_new,
                      const CoefficientSet& co, const StepParams& p, StepInfo* info = nullptr);

/// Full IMEX step: director (with w = u^n), then momentum with the new
/// director, then heat with the new velocity and director. Coefficients are
/// frozen at theta^n (max_picard = 1) or re-frozen at the latest iterate.
State coupled_step(const State& s, const CoefficientSet& co, const StepParams& p,
                   StepInfo* info = nullptr);

// ---- energy quadratures consistent with the discrete operators -------------------

/// 0.5 integral |u|^2 (faces or cells, matching the layout).
double kinetic_energy(const VectorField& u);

/// 0.5 integral |grad d|^2 by face-difference quadrature; pairs exactly with
/// the compact Laplacian under discrete integration by parts.
double elastic_energy(const DirectorField& d);

/// mu(theta)|grad u|^2 as a cell field, face-difference quadrature (each face
/// contribution split between its two cells); integral matches the implicit
/// viscous solve's energy identity.
ScalarField viscous_dissipation_field(const VectorField& u, const ScalarField& theta,
                                      const CoefficientSet& co);

/// |tension(d)|^2 at cells.
ScalarField director_dissipation_field(const DirectorField& d, const Regularization& reg);

} // namespace nemthsim
