#include "nemthsim/solvers.hpp"

#include <cmath>

namespace nemthsim {

namespace {

template <class F>
void for_cells(const Grid& g, F&& f) {
    std::size_t i = 0;
    for (int z = 0; z < g.res[2]; ++z)
        for (int y = 0; y < g.res[1]; ++y)
            for (int x = 0; x < g.res[0]; ++x, ++i) f(x, y, z, i);
}

// Cell neighbor index with periodic wrap; returns false if it crosses a wall.
bool cell_neighbor(const Grid& g, int c[3], int axis, int s) {
    c[axis] += s;
    if (c[axis] < 0 || c[axis] >= g.res[axis]) {
        if (g.bc != BcMode::periodic) return false;
        c[axis] = (c[axis] + g.res[axis]) % g.res[axis];
    }
    return true;
}

// Staggered component a with ghost handling along the transverse axes
// (odd reflection: homogeneous no-slip at walls).
double mac_at(const VectorField& u, int a, int fx, int fy, int fz) {
    const Grid& g = u.grid;
    int c[3] = {fx, fy, fz};
    double sign = 1.0;
    for (int b = 0; b < 3; ++b) {
        if (b == a) {
            if (g.bc == BcMode::periodic) {
                if (c[b] < 0) c[b] += g.res[b];
                else if (c[b] >= g.res[b]) c[b] -= g.res[b];
            }
            continue;
        }
        if (c[b] < 0) {
            if (g.bc == BcMode::periodic) c[b] += g.res[b];
            else { c[b] = -c[b] - 1; sign = -sign; }
        } else if (c[b] >= g.res[b]) {
            if (g.bc == BcMode::periodic) c[b] -= g.res[b];
            else { c[b] = 2 * g.res[b] - c[b] - 1; sign = -sign; }
        }
    }
    return sign * u.at(a, c[0], c[1], c[2]);
}

void check_solve(const CGResult& r, const char* what) {
    if (!r.converged) throw SolverError(std::string(what) + ": linear solver did not converge",
                                        r.iterations, r.residual);
}

// ---- director helpers --------------------------------------------------------------

// w . grad d with central differences, even ghosts for d.
DirectorField advect_director(const DirectorField& d, const VectorField& w_cells) {
    const Grid& g = d.grid;
    DirectorField out(g);
    for (int k = 0; k < 3; ++k)
        for_cells(g, [&](int x, int y, int z, std::size_t i) {
            double acc = 0.0;
            for (int a = 0; a < g.dims; ++a) {
                double dp = cell_shift(g, d.comp[k], GhostRule::even, x, y, z, a, +1);
                double dm = cell_shift(g, d.comp[k], GhostRule::even, x, y, z, a, -1);
                acc += w_cells.comp[a][i] * (dp - dm) / (2.0 * g.h[a]);
            }
            out.comp[k][i] = acc;
        });
    return out;
}

// Solve (sigma I - dt Lap) x = rhs on cells with even (Neumann) ghosts.
void helmholtz_solve(const Grid& g, double sigma, double dt, const std::vector<double>& rhs,
                     std::vector<double>& x, const StepParams& p, const char* what, StepInfo* info) {
    LinearOperator apply = [&g, sigma, dt](const std::vector<double>& in, std::vector<double>& out) {
        std::size_t i = 0;
        for (int z = 0; z < g.res[2]; ++z)
            for (int y = 0; y < g.res[1]; ++y)
                for (int x2 = 0; x2 < g.res[0]; ++x2, ++i) {
                    double lap = 0.0;
                    for (int a = 0; a < g.dims; ++a) {
                        double fp = cell_shift(g, in, GhostRule::even, x2, y, z, a, +1);
                        double fm = cell_shift(g, in, GhostRule::even, x2, y, z, a, -1);
                        lap += (fp - 2.0 * in[i] + fm) / (g.h[a] * g.h[a]);
                    }
                    out[i] = sigma * in[i] - dt * lap;
                }
    };
    std::vector<double> diag(g.cells());
    for_cells(g, [&](int x2, int y, int z, std::size_t i) {
        int c[3] = {x2, y, z};
        double dg = sigma;
        for (int a = 0; a < g.dims; ++a) {
            int n = 2;
            if (g.bc == BcMode::walls) {
                if (c[a] == 0) --n;               // even ghost cancels one center term
                if (c[a] == g.res[a] - 1) --n;
            }
            dg += dt * n / (g.h[a] * g.h[a]);
        }
        diag[i] = 1.0 / dg;
    });
    CGOptions opt{p.cg_tol, 0.0, p.max_cg_iter};
    CGResult r = conjugate_gradient(apply, rhs, x, &diag, opt);
    check_solve(r, what);
    if (info) info->cg_iterations += r.iterations;
}

// ---- collocated momentum helpers ---------------------------------------------------

// Skew-symmetric convection 0.5 [u.grad u + div(u x u)]; discretely
// energy-neutral on periodic grids.
VectorField skew_convection(const VectorField& u) {
    const Grid& g = u.grid;
    VectorField out(g);
    for (int j = 0; j < g.dims; ++j) {
        for_cells(g, [&](int x, int y, int z, std::size_t i) {
            double acc = 0.0;
            for (int a = 0; a < g.dims; ++a) {
                double ujp = cell_shift(g, u.comp[j], GhostRule::odd, x, y, z, a, +1);
                double ujm = cell_shift(g, u.comp[j], GhostRule::odd, x, y, z, a, -1);
                acc += 0.5 * u.comp[a][i] * (ujp - ujm) / (2.0 * g.h[a]);
                double uap = cell_shift(g, u.comp[a], GhostRule::odd, x, y, z, a, +1);
                double uam = cell_shift(g, u.comp[a], GhostRule::odd, x, y, z, a, -1);
                acc += 0.5 * (uap * ujp - uam * ujm) / (2.0 * g.h[a]);
            }
            out.comp[j][i] = acc;
        });
    }
    return out;
}

// -(grad d)^T tension(d) at cells; the gradient remainder of the Ericksen
// stress is absorbed into pressure by the projection.
VectorField elastic_force_cells(const DirectorField& d, const Regularization& reg) {
    const Grid& g = d.grid;
    MatrixField gd = director_gradient(d);
    DirectorField tension = director_tension(d, reg);
    Grid cg = g;
    cg.layout = Layout::collocated;
    VectorField out(cg);
    for (int a = 0; a < g.dims; ++a)
        for (std::size_t i = 0; i < g.cells(); ++i) {
            double acc = 0.0;
            for (int k = 0; k < 3; ++k) acc += gd.at(a, k, i) * tension.comp[k][i];
            out.comp[a][i] = -acc;
        }
    return out;
}

// Implicit variable-viscosity solve for one collocated component:
// (I - dt div_f(mu_f grad_f)) x = rhs, periodic.
void viscous_solve_collocated(const Grid& g, const std::vector<double>& mu_cells, double dt,
                              const std::vector<double>& rhs, std::vector<double>& x,
                              const StepParams& p, StepInfo* info) {
    // face viscosity per axis, arithmetic mean of adjacent cells
    std::vector<double> mu_face[3];
    for (int a = 0; a < g.dims; ++a) {
        mu_face[a].assign(g.cells(), 0.0); // face i = left face of cell i (periodic)
        for_cells(g, [&](int x2, int y, int z, std::size_t i) {
            int cm[3] = {x2, y, z};
            cell_neighbor(g, cm, a, -1);
            mu_face[a][i] = 0.5 * (mu_cells[i] + mu_cells[g.idx(cm[0], cm[1], cm[2])]);
        });
    }
    LinearOperator apply = [&](const std::vector<double>& in, std::vector<double>& out) {
        for_cells(g, [&](int x2, int y, int z, std::size_t i) {
            double acc = in[i];
            for (int a = 0; a < g.dims; ++a) {
                int cp[3] = {x2, y, z};
                cell_neighbor(g, cp, a, +1);
                std::size_t ip = g.idx(cp[0], cp[1], cp[2]);
                double flux_r = mu_face[a][ip] * (in[ip] - in[i]) / g.h[a];
                int cm[3] = {x2, y, z};
                cell_neighbor(g, cm, a, -1);
                std::size_t im = g.idx(cm[0], cm[1], cm[2]);
                double flux_l = mu_face[a][i] * (in[i] - in[im]) / g.h[a];
                acc -= dt * (flux_r - flux_l) / g.h[a];
            }
            out[i] = acc;
        });
    };
    std::vector<double> diag(g.cells());
    for_cells(g, [&](int x2, int y, int z, std::size_t i) {
        double dg = 1.0;
        for (int a = 0; a < g.dims; ++a) {
            int cp[3] = {x2, y, z};
            cell_neighbor(g, cp, a, +1);
            dg += dt * (mu_face[a][g.idx(cp[0], cp[1], cp[2])] + mu_face[a][i]) / (g.h[a] * g.h[a]);
        }
        diag[i] = 1.0 / dg;
    });
    CGOptions opt{p.cg_tol, 0.0, p.max_cg_iter};
    CGResult r = conjugate_gradient(apply, rhs, x, &diag, opt);
    check_solve(r, "momentum_step viscous solve");
    if (info) info->cg_iterations += r.iterations;
}

// ---- MAC (walls) momentum helpers --------------------------------------------------

bool interior_face(const Grid& g, int a, const int f[3]) {
    if (g.bc == BcMode::periodic) return true;
    return f[a] > 0 && f[a] < g.res[a];
}

template <class F>
void for_faces(const Grid& g, int a, F&& fn) {
    int n[3] = {g.res[0], g.res[1], g.res[2]};
    n[a] = g.face_count(a);
    for (int z = 0; z < n[2]; ++z)
        for (int y = 0; y < n[1]; ++y)
            for (int x = 0; x < n[0]; ++x) fn(x, y, z);
}

// Advective-form convection for one MAC component at its interior faces.
VectorField mac_convection(const VectorField& u) {
    const Grid& g = u.grid;
    VectorField out(g);
    for (int a = 0; a < g.dims; ++a) {
        for_faces(g, a, [&](int x, int y, int z) {
            int f[3] = {x, y, z};
            if (!interior_face(g, a, f)) { out.at(a, x, y, z) = 0.0; return; }
            double acc = 0.0;
            for (int b = 0; b < g.dims; ++b) {
                int fp[3] = {x, y, z}, fm[3] = {x, y, z};
                fp[b] += 1;
                fm[b] -= 1;
                double dd = (mac_at(u, a, fp[0], fp[1], fp[2]) - mac_at(u, a, fm[0], fm[1], fm[2])) /
                            (2.0 * g.h[b]);
                double wb;
                if (b == a) {
                    wb = u.at(a, x, y, z);
                } else {
                    // 4-point average of component b around this a-face
                    wb = 0.0;
                    for (int s1 = -1; s1 <= 0; ++s1)
                        for (int s2 = 0; s2 <= 1; ++s2) {
                            int q[3] = {x, y, z};
                            q[a] += s1;
                            q[b] += s2;
                            wb += 0.25 * mac_at(u, b, q[0], q[1], q[2]);
                        }
                }
                acc += wb * dd;
            }
            out.at(a, x, y, z) = acc;
        });
    }
    return out;
}

// mu averaged onto the edge between face rows j and j+1 of component a
// along axis b (up to 4 adjacent cells; fewer at walls).
double mu_edge(const Grid& g, const std::vector<double>& mu, int a, int b, const int f[3]) {
    double acc = 0.0;
    int cnt = 0;
    for (int s1 = -1; s1 <= 0; ++s1)
        for (int s2 = 0; s2 <= 1; ++s2) {
            int c[3] = {f[0], f[1], f[2]};
            c[a] += s1;
            c[b] += s2 - 1; // cells j-? : rows j and j+1 share the edge at offset 0 / +1
            bool ok = true;
            for (int ax : {a, b}) {
                if (c[ax] < 0 || c[ax] >= g.res[ax]) {
                    if (g.bc == BcMode::periodic) c[ax] = (c[ax] + g.res[ax]) % g.res[ax];
                    else ok = false;
                }
            }
            if (ok) { acc += mu[g.idx(c[0], c[1], c[2])]; ++cnt; }
        }
    return cnt ? acc / cnt : 0.0;
}

// Implicit viscous solve for MAC component a. Boundary faces are pinned to 0.
void viscous_solve_mac(const VectorField& u_like, int a, const std::vector<double>& mu_cells,
                       double dt, const std::vector<double>& rhs, std::vector<double>& x,
                       const StepParams& p, StepInfo* info) {
    const Grid& g = u_like.grid;

    LinearOperator apply = [&, a, dt](const std::vector<double>& in, std::vector<double>& out) {
        VectorField w(g);
        w.comp[a] = in;
        for_faces(g, a, [&](int fx, int fy, int fz) {
            int f[3] = {fx, fy, fz};
            std::size_t fi = w.fidx(a, fx, fy, fz);
            if (!interior_face(g, a, f)) { out[fi] = in[fi]; return; }
            double lap = 0.0;
            for (int b = 0; b < g.dims; ++b) {
                if (b == a) {
                    // fluxes live at the two adjacent cells
                    int cr[3] = {fx, fy, fz};          // cell to the right of the face
                    int cl[3] = {fx, fy, fz};
                    cl[a] -= 1;                         // cell to the left
                    if (g.bc == BcMode::periodic) {
                        cl[a] = (cl[a] + g.res[a]) % g.res[a];
                        cr[a] = cr[a] % g.res[a];
                    }
                    double mur = mu_cells[g.idx(cr[0], cr[1], cr[2])];
                    double mul = mu_cells[g.idx(cl[0], cl[1], cl[2])];
                    int fp[3] = {fx, fy, fz}, fm[3] = {fx, fy, fz};
                    fp[a] += 1;
                    fm[a] -= 1;
                    double flux_r = mur * (mac_at(w, a, fp[0], fp[1], fp[2]) - in[fi]) / g.h[a];
                    double flux_l = mul * (in[fi] - mac_at(w, a, fm[0], fm[1], fm[2])) / g.h[a];
                    lap += (flux_r - flux_l) / g.h[a];
                } else {
                    int fp[3] = {fx, fy, fz}, fm[3] = {fx, fy, fz};
                    fp[b] += 1;
                    fm[b] -= 1;
                    int fe_hi[3] = {fx, fy, fz}; // edge between rows b and b+1 -> offset +1
                    int fe_lo[3] = {fx, fy, fz};
                    fe_hi[b] += 1;
                    double mu_hi = mu_edge(g, mu_cells, a, b, fe_hi);
                    double mu_lo = mu_edge(g, mu_cells, a, b, fe_lo);
                    double flux_hi = mu_hi * (mac_at(w, a, fp[0], fp[1], fp[2]) - in[fi]) / g.h[b];
                    double flux_lo = mu_lo * (in[fi] - mac_at(w, a, fm[0], fm[1], fm[2])) / g.h[b];
                    lap += (flux_hi - flux_lo) / g.h[b];
                }
            }
            out[fi] = in[fi] - dt * lap;
        });
    };
    CGOptions opt{p.cg_tol, 0.0, p.max_cg_iter};
    CGResult r = conjugate_gradient(apply, rhs, x, nullptr, opt);
    check_solve(r, "momentum_step viscous solve");
    if (info) info->cg_iterations += r.iterations;
}

// ---- projection --------------------------------------------------------------------

std::pair<VectorField, ScalarField> project_collocated_periodic(const VectorField& u_star,
                                                                const StepParams& p, StepInfo* info) {
    const Grid& g = u_star.grid;
    ScalarField div = divergence_cells(u_star, GhostRule::odd);
    Grid cg = g;
    cg.layout = Layout::collocated;

    // A phi = -div(u*), A = -div_c grad_c (positive semidefinite; its null
    // space is killed by grad_c, so any CG representative works).
    LinearOperator apply = [&g, &cg](const std::vector<double>& in, std::vector<double>& out) {
        ScalarField phi(cg);
        phi.values = in;
        VectorField grad = gradient_cells(phi, GhostRule::even);
        ScalarField dv = divergence_cells(grad, GhostRule::even);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = -dv.values[i];
    };
    std::vector<double> rhs(g.cells());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -div.values[i];

    std::vector<double> phi(g.cells(), 0.0);
    CGOptions opt{p.cg_tol, 0.1 * p.projection_tol, p.max_cg_iter};
    CGResult r = conjugate_gradient(apply, rhs, phi, nullptr, opt);
    check_solve(r, "project_divergence_free");
    if (info) info->cg_iterations += r.iterations;

    ScalarField phif(cg);
    phif.values = std::move(phi);
    VectorField grad = gradient_cells(phif, GhostRule::even);
    VectorField u = u_star;
    for (int a = 0; a < g.dims; ++a)
        for (std::size_t i = 0; i < u.comp[a].size(); ++i) u.comp[a][i] -= grad.comp[a][i];
    return {std::move(u), std::move(phif)};
}

std::pair<VectorField, ScalarField> project_mac(const VectorField& u_star, const StepParams& p,
                                                StepInfo* info) {
    const Grid& g = u_star.grid;
    ScalarField div = divergence_faces(u_star);
    double net = integrate(div);
    if (std::abs(net) > 1e-8 * (1.0 + g.volume()))
        throw std::invalid_argument("project_divergence_free: nonzero net boundary flux");

    Grid cg = g;
    cg.layout = Layout::collocated;
    double mean = net / g.volume();
    std::vector<double> rhs(g.cells());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -(div.values[i] - mean);

    LinearOperator apply = [&cg](const std::vector<double>& in, std::vector<double>& out) {
        ScalarField phi(cg);
        phi.values = in;
        VectorField grad = gradient_faces(phi, GhostRule::even);
        ScalarField dv = divergence_faces(grad);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = -dv.values[i];
    };
    std::vector<double> phi(cg.cells(), 0.0);
    CGOptions opt{p.cg_tol, 0.1 * p.projection_tol, p.max_cg_iter};
    CGResult r = conjugate_gradient(apply, rhs, phi, nullptr, opt);
    check_solve(r, "project_divergence_free");
    if (info) info->cg_iterations += r.iterations;

    ScalarField phif(cg);
    phif.values = std::move(phi);
    VectorField grad = gradient_faces(phif, GhostRule::even); // staggered, matches u layout
    VectorField u = u_star;
    for (int a = 0; a < g.dims; ++a)
        for (std::size_t i = 0; i < u.comp[a].size(); ++i) u.comp[a][i] -= grad.comp[a][i];
    return {std::move(u), std::move(phif)};
}

// ---- heat helpers ------------------------------------------------------------------

// Face-normal velocities for the conservative upwind transport.
// faces[a][i] indexes the left face of cell i along axis a (periodic) or all
// res+1 faces (walls); walls boundary faces carry zero velocity.
struct FaceVelocities {
    std::vector<double> f[3];
};

FaceVelocities face_velocities(const VectorField& u) {
    const Grid& g = u.grid;
    FaceVelocities fv;
    for (int a = 0; a < g.dims; ++a) {
        if (g.layout == Layout::staggered) {
            fv.f[a] = u.comp[a];
        } else {
            // average the two adjacent cells; at walls the odd ghost gives 0
            Grid sg = g;
            sg.layout = Layout::staggered;
            VectorField tmp(sg);
            for_faces(sg, a, [&](int x, int y, int z) {
                int f[3] = {x, y, z};
                if (g.bc == BcMode::walls && (f[a] == 0 || f[a] == g.res[a])) {
                    tmp.at(a, x, y, z) = 0.0;
                    return;
                }
                int cr[3] = {x, y, z};
                int cl[3] = {x, y, z};
                cl[a] -= 1;
                if (g.bc == BcMode::periodic && cl[a] < 0) cl[a] += g.res[a];
                tmp.at(a, x, y, z) = 0.5 * (u.comp[a][g.idx(cr[0], cr[1], cr[2])] +
                                            u.comp[a][g.idx(cl[0], cl[1], cl[2])]);
            });
            fv.f[a] = std::move(tmp.comp[a]);
        }
    }
    return fv;
}

std::size_t face_index(const Grid& g, int a, int x, int y, int z) {
    int nx = (a == 0) ? g.face_count(0) : g.res[0];
    int ny = (a == 1) ? g.face_count(1) : g.res[1];
    return std::size_t(x) + std::size_t(nx) * (std::size_t(y) + std::size_t(ny) * std::size_t(z));
}

// theta - dt * div(w theta_upwind); conservative, monotone under CFL.
ScalarField upwind_transport(const ScalarField& theta, const FaceVelocities& fv, double dt) {
    const Grid& g = theta.grid;
    double cfl = 0.0;
    for (int a = 0; a < g.dims; ++a) {
        double wmax = 0.0;
        for (double v : fv.f[a]) wmax = std::max(wmax, std::abs(v));
        cfl += dt * wmax / g.h[a];
    }
    if (cfl > 1.0)
        throw SchemeDefect("heat_step: transport CFL number " + std::to_string(cfl) + " exceeds 1");

    ScalarField out = theta;
    for_cells(g, [&](int x, int y, int z, std::size_t i) {
        double acc = 0.0;
        for (int a = 0; a < g.dims; ++a) {
            int c[3] = {x, y, z};
            // left face index = cell index; right face = cell+1 (walls) or wrap
            int fl = c[a];
            int fr = c[a] + 1;
            if (g.bc == BcMode::periodic && fr >= g.res[a]) fr -= g.res[a];
            int pl[3] = {x, y, z}, pr[3] = {x, y, z};
            pl[a] = fl;
            pr[a] = fr;
            double wl = fv.f[a][face_index(g, a, pl[0], pl[1], pl[2])];
            double wr = fv.f[a][face_index(g, a, pr[0], pr[1], pr[2])];

            double flux_l = 0.0, flux_r = 0.0;
            // upwind donor cell per face
            int cm[3] = {x, y, z};
            bool has_m = cell_neighbor(g, cm, a, -1);
            int cp[3] = {x, y, z};
            bool has_p = cell_neighbor(g, cp, a, +1);
            if (!(g.bc == BcMode::walls && c[a] == 0)) {
                double donor = wl >= 0.0 ? (has_m ? theta.values[g.idx(cm[0], cm[1], cm[2])] : 0.0)
                                         : theta.values[i];
                flux_l = wl * donor;
            }
            if (!(g.bc == BcMode::walls && c[a] == g.res[a] - 1)) {
                double donor = wr >= 0.0 ? theta.values[i]
                                         : (has_p ? theta.values[g.idx(cp[0], cp[1], cp[2])] : 0.0);
                flux_r = wr * donor;
            }
            acc += (flux_r - flux_l) / g.h[a];
        }
        out.values[i] -= dt * acc;
    });
    return out;
}

// Directionally split anisotropic diffusion coefficients for
// D = k I + h d x d, all entries nonnegative when the cross terms are small
// enough relative to k (checked; this is what makes the solve monotone).
struct HeatCoeffs {
    std::vector<double> alpha[3];      // per-cell axis coefficients
    std::vector<double> gamma_p[3];    // per-cell diagonal (+,+) coefficient, pair index
    std::vector<double> gamma_m[3];    // per-cell diagonal (+,-) coefficient
    // pair index: 0 -> (0,1), 1 -> (0,2), 2 -> (1,2)
    static int pair_of(int a, int b) { return (a == 0) ? (b == 1 ? 0 : 1) : 2; }
};

HeatCoeffs heat_coefficients(const ScalarField& theta_coeff, const DirectorField& d,
                             const CoefficientSet& co) {
    const Grid& g = theta_coeff.grid;
    HeatCoeffs hc;
    for (int a = 0; a < g.dims; ++a) hc.alpha[a].assign(g.cells(), 0.0);
    for (int q = 0; q < 3; ++q) {
        hc.gamma_p[q].assign(g.cells(), 0.0);
        hc.gamma_m[q].assign(g.cells(), 0.0);
    }
    for (std::size_t i = 0; i < g.cells(); ++i) {
        double th = theta_coeff.values[i];
        double kv = co.k.eval(th), hv = co.h.eval(th);
        // only the in-plane components of d generate spatial fluxes
        double dd[3] = {d.comp[0][i], d.comp[1][i], d.comp[2][i]};
        double alpha[3];
        for (int a = 0; a < g.dims; ++a) alpha[a] = kv + hv * dd[a] * dd[a];
        for (int a = 0; a < g.dims; ++a)
            for (int b = a + 1; b < g.dims; ++b) {
                double off = hv * dd[a] * dd[b];
                int q = HeatCoeffs::pair_of(a, b);
                double scale = (g.h[a] * g.h[a] + g.h[b] * g.h[b]) / (g.h[a] * g.h[b]);
                hc.gamma_p[q][i] = std::max(off, 0.0) * scale;
                hc.gamma_m[q][i] = std::max(-off, 0.0) * scale;
                alpha[a] -= std::abs(off) * g.h[a] / g.h[b];
                alpha[b] -= std::abs(off) * g.h[b] / g.h[a];
            }
        for (int a = 0; a < g.dims; ++a) {
            if (alpha[a] < -1e-13)
                throw SchemeDefect("heat_step: anisotropy too strong for a monotone stencil "
                                   "(needs k(theta) to dominate h(theta))");
            hc.alpha[a][i] = std::max(alpha[a], 0.0);
        }
    }
    return hc;
}

// Apply theta - dt * L theta with the split coefficients; exact flux form.
void heat_apply(const Grid& g, const HeatCoeffs& hc, double dt, const std::vector<double>& in,
                std::vector<double>& out) {
    for_cells(g, [&](int x, int y, int z, std::size_t i) {
        double lap = 0.0;
        for (int a = 0; a < g.dims; ++a) {
            for (int s = -1; s <= 1; s += 2) {
                int c[3] = {x, y, z};
                if (!cell_neighbor(g, c, a, s)) continue; // no flux across walls
                std::size_t j = g.idx(c[0], c[1], c[2]);
                double coef = 0.5 * (hc.alpha[a][i] + hc.alpha[a][j]);
                lap += coef * (in[j] - in[i]) / (g.h[a] * g.h[a]);
            }
        }
        for (int a = 0; a < g.dims; ++a)
            for (int b = a + 1; b < g.dims; ++b) {
                int q = HeatCoeffs::pair_of(a, b);
                double w2 = g.h[a] * g.h[a] + g.h[b] * g.h[b];
                for (int s = -1; s <= 1; s += 2) {
                    { // (+,+) diagonal family
                        int c[3] = {x, y, z};
                        if (cell_neighbor(g, c, a, s) && cell_neighbor(g, c, b, s)) {
                            std::size_t j = g.idx(c[0], c[1], c[2]);
                            double coef = 0.5 * (hc.gamma_p[q][i] + hc.gamma_p[q][j]);
                            lap += coef * (in[j] - in[i]) / w2;
                        }
                    }
                    { // (+,-) diagonal family
                        int c[3] = {x, y, z};
                        if (cell_neighbor(g, c, a, s) && cell_neighbor(g, c, b, -s)) {
                            std::size_t j = g.idx(c[0], c[1], c[2]);
                            double coef = 0.5 * (hc.gamma_m[q][i] + hc.gamma_m[q][j]);
                            lap += coef * (in[j] - in[i]) / w2;
                        }
                    }
                }
            }
        out[i] = in[i] - dt * lap;
    });
}

// ---- internal implementations with an explicit coefficient temperature ------------

std::pair<VectorField, ScalarField> momentum_impl(const State& s, const CoefficientSet& co,
                                                  const StepParams& p, const ScalarField& theta_coeff,
                                                  StepInfo* info) {
    const Grid& g = s.u.grid;
    std::vector<double> mu_cells(g.cells());
    for (std::size_t i = 0; i < mu_cells.size(); ++i) mu_cells[i] = co.mu.eval(theta_coeff.values[i]);

    VectorField rhs = s.u;
    if (g.layout == Layout::collocated) {
        VectorField conv = skew_convection(s.u);
        VectorField fel = elastic_force_cells(s.d, s.reg);
        for (int a = 0; a < g.dims; ++a)
            for (std::size_t i = 0; i < rhs.comp[a].size(); ++i)
                rhs.comp[a][i] += p.dt * (-conv.comp[a][i] + fel.comp[a][i]);
        VectorField uv(g);
        for (int a = 0; a < g.dims; ++a) {
            uv.comp[a] = rhs.comp[a]; // initial guess = rhs
            viscous_solve_collocated(g, mu_cells, p.dt, rhs.comp[a], uv.comp[a], p, info);
        }
        auto [u, phi] = project_collocated_periodic(uv, p, info);
        ScalarField P = phi;
        for (double& v : P.values) v /= p.dt;
        if (info) {
            ScalarField dis = viscous_dissipation_field(u, theta_coeff, co);
            info->viscous_dissipation = integrate(dis);
        }
        return {std::move(u), std::move(P)};
    }

    // MAC / walls
    VectorField conv = mac_convection(s.u);
    VectorField fel_c = elastic_force_cells(s.d, s.reg);
    for (int a = 0; a < g.dims; ++a) {
        for_faces(g, a, [&](int x, int y, int z) {
            int f[3] = {x, y, z};
            std::size_t fi = rhs.fidx(a, x, y, z);
            if (!interior_face(g, a, f)) { rhs.comp[a][fi] = 0.0; return; }
            int cr[3] = {x, y, z};
            int cl[3] = {x, y, z};
            cl[a] -= 1;
            if (g.bc == BcMode::periodic) cl[a] = (cl[a] + g.res[a]) % g.res[a];
            double fel = 0.5 * (fel_c.comp[a][g.idx(cr[0], cr[1], cr[2])] +
                                fel_c.comp[a][g.idx(cl[0], cl[1], cl[2])]);
            rhs.comp[a][fi] = s.u.comp[a][fi] + p.dt * (-conv.comp[a][fi] + fel);
        });
    }
    VectorField uv(g);
    for (int a = 0; a < g.dims; ++a) {
        uv.comp[a] = rhs.comp[a];
        viscous_solve_mac(s.u, a, mu_cells, p.dt, rhs.comp[a], uv.comp[a], p, info);
    }
    auto [u, phi] = project_mac(uv, p, info);
    ScalarField P = phi;
    for (double& v : P.values) v /= p.dt;
    if (info) {
        ScalarField dis = viscous_dissipation_field(u, theta_coeff, co);
        info->viscous_dissipation = integrate(dis);
    }
    return {std::move(u), std::move(P)};
}

ScalarField heat_impl(const State& s, const VectorField& u_new, const DirectorField& d_new,
                      const CoefficientSet& co, const StepParams& p, const ScalarField& theta_coeff,
                      StepInfo* info) {
    require_positive_theta(s.theta, "heat_step");
    const Grid& g = s.theta.grid;

    FaceVelocities fv = face_velocities(u_new);
    ScalarField theta_a = upwind_transport(s.theta, fv, p.dt);

    ScalarField visc = viscous_dissipation_field(u_new, theta_coeff, co);
    ScalarField dir = director_dissipation_field(d_new, s.reg);
    ScalarField src = visc;
    for (std::size_t i = 0; i < src.size(); ++i) src.values[i] += dir.values[i];

    ScalarField rhs = theta_a;
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs.values[i] += p.dt * src.values[i];

    HeatCoeffs hc = heat_coefficients(theta_coeff, d_new, co);
    LinearOperator apply = [&](const std::vector<double>& in, std::vector<double>& out) {
        heat_apply(g, hc, p.dt, in, out);
    };
    std::vector<double> diag(g.cells());
    for_cells(g, [&](int x, int y, int z, std::size_t i) {
        double dg = 1.0;
        for (int a = 0; a < g.dims; ++a)
            for (int ss = -1; ss <= 1; ss += 2) {
                int c[3] = {x, y, z};
                if (!cell_neighbor(g, c, a, ss)) continue;
                std::size_t j = g.idx(c[0], c[1], c[2]);
                dg += p.dt * 0.5 * (hc.alpha[a][i] + hc.alpha[a][j]) / (g.h[a] * g.h[a]);
            }
        for (int a = 0; a < g.dims; ++a)
            for (int b = a + 1; b < g.dims; ++b) {
                int q = HeatCoeffs::pair_of(a, b);
                double w2 = g.h[a] * g.h[a] + g.h[b] * g.h[b];
                for (int ss = -1; ss <= 1; ss += 2) {
                    int c1[3] = {x, y, z};
                    if (cell_neighbor(g, c1, a, ss) && cell_neighbor(g, c1, b, ss))
                        dg += p.dt * 0.5 * (hc.gamma_p[q][i] + hc.gamma_p[q][g.idx(c1[0], c1[1], c1[2])]) / w2;
                    int c2[3] = {x, y, z};
                    if (cell_neighbor(g, c2, a, ss) && cell_neighbor(g, c2, b, -ss))
                        dg += p.dt * 0.5 * (hc.gamma_m[q][i] + hc.gamma_m[q][g.idx(c2[0], c2[1], c2[2])]) / w2;
                }
            }
        diag[i] = 1.0 / dg;
    });

    std::vector<double> theta_new = rhs.values; // initial guess
    CGOptions opt{std::min(p.cg_tol, 1e-13), 0.0, p.max_cg_iter};
    CGResult r = conjugate_gradient(apply, rhs.values, theta_new, &diag, opt);
    check_solve(r, "heat_step diffusion solve");
    if (info) {
        info->cg_iterations += r.iterations;
        info->source_total = integrate(src);
        info->director_dissipation = integrate(dir);
        info->viscous_dissipation = integrate(visc);
    }

    ScalarField out(g);
    out.values = std::move(theta_new);
    double floor = s.theta.min();
    double scale = std::max(1.0, std::abs(s.theta.max()));
    if (out.min() < floor - 1e-10 * scale)
        throw SchemeDefect("heat_step: temperature fell below its minimum-principle floor");
    return out;
}

} // namespace

// ---- public API --------------------------------------------------------------------

DirectorField director_step(const State& s, const VectorField& w, const StepParams& p) {
    if (s.reg.limit) throw std::invalid_argument("director_step: use limit_director_step in limit mode");
    p.validate(s.reg);
    const Grid& g = s.d.grid;
    VectorField wc = to_cell_centered(w);
    DirectorField adv = advect_director(s.d, wc);
    DirectorField f = gl_force(s.d, s.reg.eps);
    double S = p.effective_stabilization(s.reg);
    double sigma = 1.0 + S * p.dt;

    DirectorField out(g);
    for (int k = 0; k < 3; ++k) {
        std::vector<double> rhs(g.cells());
        for (std::size_t i = 0; i < rhs.size(); ++i)
            rhs[i] = sigma * s.d.comp[k][i] - p.dt * (adv.comp[k][i] + f.comp[k][i]);
        out.comp[k] = rhs;
        helmholtz_solve(g, sigma, p.dt, rhs, out.comp[k], p, "director_step", nullptr);
    }
    return out;
}

DirectorField limit_director_step(const State& s, const VectorField& w, const StepParams& p) {
    p.validate(s.reg);
    const Grid& g = s.d.grid;
    VectorField wc = to_cell_centered(w);
    DirectorField adv = advect_director(s.d, wc);
    MatrixField gd = director_gradient(s.d);

    DirectorField out(g);
    for (int k = 0; k < 3; ++k) {
        std::vector<double> rhs(g.cells());
        for (std::size_t i = 0; i < rhs.size(); ++i) {
            double g2 = 0.0;
            for (int a = 0; a < g.dims; ++a)
                for (int kk = 0; kk < 3; ++kk) g2 += gd.at(a, kk, i) * gd.at(a, kk, i);
            rhs[i] = s.d.comp[k][i] + p.dt * (-adv.comp[k][i] + g2 * s.d.comp[k][i]);
        }
        out.comp[k] = rhs;
        helmholtz_solve(g, 1.0, p.dt, rhs, out.comp[k], p, "limit_director_step", nullptr);
    }
    // renormalize; |d| = 1 exactly afterwards
    for (std::size_t i = 0; i < g.cells(); ++i) {
        double n = out.norm_at(i);
        if (n < 0.5)
            throw SchemeDefect("limit_director_step: |d| dropped below 0.5; time step too large");
        for (int k = 0; k < 3; ++k) out.comp[k][i] /= n;
    }
    return out;
}

std::pair<VectorField, ScalarField> momentum_step(const State& s, const CoefficientSet& co,
                                                  const StepParams& p, StepInfo* info) {
    p.validate(s.reg);
    require_positive_theta(s.theta, "momentum_step");
    return momentum_impl(s, co, p, s.theta, info);
}

std::pair<VectorField, ScalarField> project_divergence_free(const VectorField& u_star,
                                                            const StepParams& p) {
    const Grid& g = u_star.grid;
    if (g.layout == Layout::staggered) return project_mac(u_star, p, nullptr);
    if (g.bc != BcMode::periodic)
        throw std::invalid_argument("project_divergence_free: collocated projection is periodic-only");
    return project_collocated_periodic(u_star, p, nullptr);
}

ScalarField heat_step(const State& s, const VectorField& u_new, const DirectorField& d_new,
                      const CoefficientSet& co, const StepParams& p, StepInfo* info) {
    p.validate(s.reg);
    return heat_impl(s, u_new, d_new, co, p, s.theta, info);
}

State coupled_step(const State& s, const CoefficientSet& co, const StepParams& p, StepInfo* info) {
    p.validate(s.reg);
    require_positive_theta(s.theta, "coupled_step");

    DirectorField d_new = s.reg.limit ? limit_director_step(s, s.u, p) : director_step(s, s.u, p);

    State result;
    const ScalarField* theta_coeff = &s.theta;
    ScalarField picard_theta;
    StepInfo local;
    StepInfo* use_info = info ? info : &local;
    for (int pic = 0; pic < p.max_picard; ++pic) {
        use_info->picard_iterations = pic + 1;
        State ms = s;
        ms.d = d_new;
        auto [u_new, P_new] = momentum_impl(ms, co, p, *theta_coeff, use_info);
        ScalarField theta_new = heat_impl(s, u_new, d_new, co, p, *theta_coeff, use_info);
        result.u = std::move(u_new);
        result.P = std::move(P_new);
        result.theta = std::move(theta_new);
        if (pic + 1 < p.max_picard) {
            picard_theta = result.theta;
            theta_coeff = &picard_theta;
        }
    }
    result.d = std::move(d_new);
    result.t = s.t + p.dt;
    result.reg = s.reg;
    return result;
}

double kinetic_energy(const VectorField& u) {
    double s = 0.0;
    for (int a = 0; a < u.grid.dims; ++a)
        for (double v : u.comp[a]) s += v * v;
    return 0.5 * s * u.grid.cell_volume();
}

double elastic_energy(const DirectorField& d) {
    const Grid& g = d.grid;
    double acc = 0.0;
    for (int k = 0; k < 3; ++k) {
        ScalarField comp(g);
        comp.values = d.comp[k];
        VectorField gf = gradient_faces(comp, GhostRule::even);
        acc += inner_product(gf, gf);
    }
    return 0.5 * acc;
}

ScalarField viscous_dissipation_field(const VectorField& u, const ScalarField& theta,
                                      const CoefficientSet& co) {
    const Grid& g = u.grid;
    std::vector<double> mu_cells(theta.size());
    for (std::size_t i = 0; i < mu_cells.size(); ++i) mu_cells[i] = co.mu.eval(theta.values[i]);

    Grid cg = g;
    cg.layout = Layout::collocated;
    ScalarField out(cg);

    if (g.layout == Layout::collocated) {
        for (int a = 0; a < g.dims; ++a)
            for (int j = 0; j < g.dims; ++j)
                for_cells(cg, [&](int x, int y, int z, std::size_t i) {
                    // face between this cell and its +a neighbor
                    int c[3] = {x, y, z};
                    if (!cell_neighbor(g, c, a, +1)) {
                        // wall face: odd ghost -> difference 2*u/h
                        double dval = 2.0 * u.comp[j][i] / g.h[a];
                        out.values[i] += mu_cells[i] * dval * dval;
                        return;
                    }
                    std::size_t nb = g.idx(c[0], c[1], c[2]);
                    double dval = (u.comp[j][nb] - u.comp[j][i]) / g.h[a];
                    double muf = 0.5 * (mu_cells[i] + mu_cells[nb]);
                    double contrib = muf * dval * dval;
                    out.values[i] += 0.5 * contrib;
                    out.values[nb] += 0.5 * contrib;
                    int cc[3] = {x, y, z};
                    if (g.bc == BcMode::walls && cc[a] == 0) { // bottom wall face
                        double dw = 2.0 * u.comp[j][i] / g.h[a];
                        out.values[i] += mu_cells[i] * dw * dw;
                    }
                });
        return out;
    }

    // MAC: mirror the flux positions of the viscous operator exactly
    for (int a = 0; a < g.dims; ++a) {
        VectorField wlike(g);
        wlike.comp[a] = u.comp[a];
        for (int b = 0; b < g.dims; ++b) {
            if (b == a) {
                // fluxes live at cell centers
                for_cells(cg, [&](int x, int y, int z, std::size_t i) {
                    int fl[3] = {x, y, z};
                    int fr[3] = {x, y, z};
                    fr[a] += 1;
                    if (g.bc == BcMode::periodic && fr[a] >= g.res[a]) fr[a] -= g.res[a];
                    double dval = (u.at(a, fr[0], fr[1], fr[2]) - u.at(a, fl[0], fl[1], fl[2])) / g.h[a];
                    out.values[i] += mu_cells[i] * dval * dval;
                });
            } else {
                // fluxes live at edges between face rows e-1 and e along b;
                // walls have res[b]+1 edge planes, periodic res[b]
                int n[3] = {g.res[0], g.res[1], g.res[2]};
                n[a] = g.face_count(a);
                n[b] = g.bc == BcMode::walls ? g.res[b] + 1 : g.res[b];
                for (int ez = 0; ez < n[2]; ++ez)
                    for (int ey = 0; ey < n[1]; ++ey)
                        for (int ex = 0; ex < n[0]; ++ex) {
                            int f[3] = {ex, ey, ez};
                            if (g.bc == BcMode::walls && (f[a] == 0 || f[a] == g.res[a]))
                                continue; // rows pinned to zero carry no flux
                            int fm[3] = {f[0], f[1], f[2]};
                            fm[b] -= 1;
                            double dval = (mac_at(wlike, a, f[0], f[1], f[2]) -
                                           mac_at(wlike, a, fm[0], fm[1], fm[2])) / g.h[b];
                            double mue = mu_edge(g, mu_cells, a, b, f);
                            double contrib = mue * dval * dval;
                            int cnt = 0;
                            std::size_t cells_adj[4];
                            for (int s1 = -1; s1 <= 0; ++s1)
                                for (int s2 = -1; s2 <= 0; ++s2) {
                                    int c[3] = {f[0], f[1], f[2]};
                                    c[a] += s1;
                                    c[b] += s2;
                                    bool ok = true;
                                    for (int ax : {a, b}) {
                                        if (c[ax] < 0 || c[ax] >= g.res[ax]) {
                                            if (g.bc == BcMode::periodic)
                                                c[ax] = (c[ax] + g.res[ax]) % g.res[ax];
                                            else ok = false;
                                        }
                                    }
                                    if (ok) cells_adj[cnt++] = g.idx(c[0], c[1], c[2]);
                                }
                            for (int q = 0; q < cnt; ++q) out.values[cells_adj[q]] += contrib / cnt;
                        }
            }
        }
    }
    return out;
}

ScalarField director_dissipation_field(const DirectorField& d, const Regularization& reg) {
    DirectorField tension = director_tension(d, reg);
    ScalarField out(d.grid);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double acc = 0.0;
        for (int k = 0; k < 3; ++k) acc += tension.comp[k][i] * tension.comp[k][i];
        out.values[i] = acc;
    }
    return out;
}

} // namespace nemthsim
