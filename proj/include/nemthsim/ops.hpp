#pragma once

#include <functional>

#include "nemthsim/field.hpp"

namespace nemthsim {

/// Ghost policy for cell-centered fields in walls mode. Periodic grids always
/// wrap. `even` mirrors the first interior cell (homogeneous Neumann), `odd`
/// negates it (homogeneous Dirichlet at the wall face, used for velocity).
enum class GhostRule { even, odd };

enum class DiffKind { gradient, divergence, laplacian, director_gradient_tensor };

/// Neighbor value of a cell array with one ghost shift of +/-1 along `axis`.
inline double cell_shift(const Grid& g, const std::vector<double>& a, GhostRule gr,
                         int x, int y, int z, int axis, int s) {
    int c[3] = {x, y, z};
    c[axis] += s;
    double sign = 1.0;
    if (c[axis] < 0) {
        if (g.bc == BcMode::periodic) {
            c[axis] += g.res[axis];
        } else {
            c[axis] = -c[axis] - 1; // mirror across the x=0 wall
            sign = (gr == GhostRule::even) ? 1.0 : -1.0;
        }
    } else if (c[axis] >= g.res[axis]) {
        if (g.bc == BcMode::periodic) {
            c[axis] -= g.res[axis];
        } else {
            c[axis] = 2 * g.res[axis] - c[axis] - 1;
            sign = (gr == GhostRule::even) ? 1.0 : -1.0;
        }
    }
    return sign * a[g.idx(c[0], c[1], c[2])];
}

// ---- compact (staggered) operators ------------------------------------------------

/// Gradient of a cell scalar, returned on faces: g_{i+1/2} = (f_{i+1} - f_i)/h.
/// Composed with divergence_faces this reproduces laplacian() exactly.
VectorField gradient_faces(const ScalarField& f, GhostRule gr = GhostRule::even);

/// Divergence of a face-staggered vector field, at cells (exact flux form).
ScalarField divergence_faces(const VectorField& v);

/// Compact second-order Laplacian of a cell scalar.
ScalarField laplacian(const ScalarField& f, GhostRule gr = GhostRule::even);

/// Compact Laplacian applied to each director component (Neumann ghosts).
DirectorField laplacian(const DirectorField& d);

// ---- central (collocated) operators -----------------------------------------------

/// Central gradient of a cell scalar, at cells.
VectorField gradient_cells(const ScalarField& f, GhostRule gr = GhostRule::even);

/// Central divergence of a collocated vector field.
ScalarField divergence_cells(const VectorField& v, GhostRule gr = GhostRule::odd);

/// Central gradient tensor of a collocated vector field: G(i,j) = d_i u_j.
MatrixField gradient_tensor(const VectorField& u, GhostRule gr = GhostRule::odd);

/// Central gradient tensor of the director: G(i,k) = d_i d^k (even ghosts).
MatrixField director_gradient(const DirectorField& d);

// ---- generic dispatch (rank checked) ----------------------------------------------

VectorField diff_op(DiffKind kind, const ScalarField& f);
ScalarField diff_op(DiffKind kind, const VectorField& v);
MatrixField diff_op(DiffKind kind, const DirectorField& d);

// ---- quadrature -------------------------------------------------------------------

/// Midpoint quadrature: sum of cell values times cell volume.
double integrate(const ScalarField& f);

double inner_product(const ScalarField& a, const ScalarField& b);
/// Same-layout pairing. Staggered fields pair face-by-face with full cell
/// volume per face; exact discrete integration by parts against cell scalars
/// holds on periodic grids and on walls whenever v.nu = 0 on boundary faces.
double inner_product(const VectorField& a, const VectorField& b);
double inner_product(const DirectorField& a, const DirectorField& b);

/// (integral of |f|^p)^(1/p).
double lp_norm(const ScalarField& f, double p);

// ---- sampling helpers --------------------------------------------------------------

using ScalarFn = std::function<double(double, double, double)>;

ScalarField sample_scalar(const Grid& g, const ScalarFn& fn);
/// Component c of a collocated vector field, or of a staggered one (sampled at
/// face coordinates along its own axis).
VectorField sample_vector(const Grid& g, const ScalarFn& fx, const ScalarFn& fy,
                          const ScalarFn& fz = nullptr);
DirectorField sample_director(const Grid& g, const ScalarFn& f0, const ScalarFn& f1,
                              const ScalarFn& f2);

/// Pointwise |v| max of the cell-centered divergence appropriate to the layout.
double max_abs_divergence(const VectorField& u);

/// Cell-centered copy of a velocity field (averages faces in staggered mode).
VectorField to_cell_centered(const VectorField& u);

} // namespace nemthsim
