#include "nemthsim/ops.hpp"

#include <cmath>

namespace nemthsim {

namespace {

// Cell value with at most one index out of range along `axis` (ghost layer).
double cell_value(const Grid& g, const std::vector<double>& a, GhostRule gr,
                  int cx, int cy, int cz, int axis) {
    int c[3] = {cx, cy, cz};
    double sign = 1.0;
    if (c[axis] < 0) {
        if (g.bc == BcMode::periodic) c[axis] += g.res[axis];
        else { c[axis] = -c[axis] - 1; sign = (gr == GhostRule::even) ? 1.0 : -1.0; }
    } else if (c[axis] >= g.res[axis]) {
        if (g.bc == BcMode::periodic) c[axis] -= g.res[axis];
        else { c[axis] = 2 * g.res[axis] - c[axis] - 1; sign = (gr == GhostRule::even) ? 1.0 : -1.0; }
    }
    return sign * a[g.idx(c[0], c[1], c[2])];
}

template <class F>
void for_cells(const Grid& g, F&& f) {
    std::size_t i = 0;
    for (int z = 0; z < g.res[2]; ++z)
        for (int y = 0; y < g.res[1]; ++y)
            for (int x = 0; x < g.res[0]; ++x, ++i) f(x, y, z, i);
}

} // namespace

VectorField gradient_faces(const ScalarField& f, GhostRule gr) {
    const Grid& g = f.grid;
    Grid sg = g;
    sg.layout = Layout::staggered;
    VectorField out(sg);
    for (int a = 0; a < g.dims; ++a) {
        int n[3] = {g.res[0], g.res[1], g.res[2]};
        n[a] = g.face_count(a);
        for (int z = 0; z < n[2]; ++z)
            for (int y = 0; y < n[1]; ++y)
                for (int x = 0; x < n[0]; ++x) {
                    int c[3] = {x, y, z};
                    int cl[3] = {x, y, z}, cr[3] = {x, y, z};
                    cl[a] = c[a] - 1;
                    cr[a] = c[a];
                    double fl = cell_value(g, f.values, gr, cl[0], cl[1], cl[2], a);
                    double fr = cell_value(g, f.values, gr, cr[0], cr[1], cr[2], a);
                    out.at(a, x, y, z) = (fr - fl) / g.h[a];
                }
    }
    return out;
}

ScalarField divergence_faces(const VectorField& v) {
    const Grid& g = v.grid;
    if (g.layout != Layout::staggered)
        throw std::invalid_argument("divergence_faces: field is not staggered");
    Grid cg = g;
    cg.layout = Layout::collocated;
    ScalarField out(cg);
    for_cells(cg, [&](int x, int y, int z, std::size_t i) {
        double div = 0.0;
        for (int a = 0; a < g.dims; ++a) {
            int c[3] = {x, y, z};
            int left = c[a];
            int right = c[a] + 1;
            if (g.bc == BcMode::periodic && right >= g.res[a]) right -= g.res[a];
            int fl[3] = {x, y, z}, fr[3] = {x, y, z};
            fl[a] = left;
            fr[a] = right;
            div += (v.at(a, fr[0], fr[1], fr[2]) - v.at(a, fl[0], fl[1], fl[2])) / g.h[a];
        }
        out.values[i] = div;
    });
    return out;
}

ScalarField laplacian(const ScalarField& f, GhostRule gr) {
    const Grid& g = f.grid;
    ScalarField out(g);
    for_cells(g, [&](int x, int y, int z, std::size_t i) {
        double acc = 0.0;
        double fc = f.values[i];
        for (int a = 0; a < g.dims; ++a) {
            double fp = cell_shift(g, f.values, gr, x, y, z, a, +1);
            double fm = cell_shift(g, f.values, gr, x, y, z, a, -1);
            acc += (fp - 2.0 * fc + fm) / (g.h[a] * g.h[a]);
        }
        out.values[i] = acc;
    });
    return out;
}

DirectorField laplacian(const DirectorField& d) {
    const Grid& g = d.grid;
    DirectorField out(g);
    for (int c = 0; c < 3; ++c) {
        for_cells(g, [&](int x, int y, int z, std::size_t i) {
            double acc = 0.0;
            double fc = d.comp[c][i];
            for (int a = 0; a < g.dims; ++a) {
                double fp = cell_shift(g, d.comp[c], GhostRule::even, x, y, z, a, +1);
                double fm = cell_shift(g, d.comp[c], GhostRule::even, x, y, z, a, -1);
                acc += (fp - 2.0 * fc + fm) / (g.h[a] * g.h[a]);
            }
            out.comp[c][i] = acc;
        });
    }
    return out;
}

VectorField gradient_cells(const ScalarField& f, GhostRule gr) {
    const Grid& g = f.grid;
    Grid cg = g;
    cg.layout = Layout::collocated;
    VectorField out(cg);
    for (int a = 0; a < g.dims; ++a) {
        for_cells(g, [&](int x, int y, int z, std::size_t i) {
            double fp = cell_shift(g, f.values, gr, x, y, z, a, +1);
            double fm = cell_shift(g, f.values, gr, x, y, z, a, -1);
            out.comp[a][i] = (fp - fm) / (2.0 * g.h[a]);
        });
    }
    return out;
}

ScalarField divergence_cells(const VectorField& v, GhostRule gr) {
    const Grid& g = v.grid;
    if (g.layout != Layout::collocated)
        throw std::invalid_argument("divergence_cells: field is not collocated");
    ScalarField out(g);
    for_cells(g, [&](int x, int y, int z, std::size_t i) {
        double div = 0.0;
        for (int a = 0; a < g.dims; ++a) {
            double fp = cell_shift(g, v.comp[a], gr, x, y, z, a, +1);
            double fm = cell_shift(g, v.comp[a], gr, x, y, z, a, -1);
            div += (fp - fm) / (2.0 * g.h[a]);
        }
        out.values[i] = div;
    });
    return out;
}

MatrixField gradient_tensor(const VectorField& u, GhostRule gr) {
    const Grid& g = u.grid;
    if (g.layout != Layout::collocated)
        throw std::invalid_argument("gradient_tensor: convert staggered velocity to cells first");
    MatrixField out(g, g.dims, g.dims);
    for (int a = 0; a < g.dims; ++a)
        for (int j = 0; j < g.dims; ++j)
            for_cells(g, [&](int x, int y, int z, std::size_t i) {
                double fp = cell_shift(g, u.comp[j], gr, x, y, z, a, +1);
                double fm = cell_shift(g, u.comp[j], gr, x, y, z, a, -1);
                out.at(a, j, i) = (fp - fm) / (2.0 * g.h[a]);
            });
    return out;
}

MatrixField director_gradient(const DirectorField& d) {
    const Grid& g = d.grid;
    MatrixField out(g, g.dims, 3);
    for (int a = 0; a < g.dims; ++a)
        for (int k = 0; k < 3; ++k)
            for_cells(g, [&](int x, int y, int z, std::size_t i) {
                double fp = cell_shift(g, d.comp[k], GhostRule::even, x, y, z, a, +1);
                double fm = cell_shift(g, d.comp[k], GhostRule::even, x, y, z, a, -1);
                out.at(a, k, i) = (fp - fm) / (2.0 * g.h[a]);
            });
    return out;
}

VectorField diff_op(DiffKind kind, const ScalarField& f) {
    if (kind == DiffKind::gradient) return gradient_faces(f);
    if (kind == DiffKind::divergence || kind == DiffKind::director_gradient_tensor)
        throw std::invalid_argument("diff_op: rank mismatch for scalar field");
    // laplacian of a scalar is a scalar; steer callers to laplacian().
    throw std::invalid_argument("diff_op: use laplacian(ScalarField) for scalar Laplacians");
}

ScalarField diff_op(DiffKind kind, const VectorField& v) {
    if (kind != DiffKind::divergence)
        throw std::invalid_argument("diff_op: rank mismatch for vector field");
    return v.grid.layout == Layout::staggered ? divergence_faces(v) : divergence_cells(v);
}

MatrixField diff_op(DiffKind kind, const DirectorField& d) {
    if (kind != DiffKind::director_gradient_tensor)
        throw std::invalid_argument("diff_op: rank mismatch for director field");
    return director_gradient(d);
}

double integrate(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return s * f.grid.cell_volume();
}

double inner_product(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid, b.grid, "inner_product");
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
    return s * a.grid.cell_volume();
}

double inner_product(const VectorField& a, const VectorField& b) {
    require_same_grid(a.grid, b.grid, "inner_product");
    double s = 0.0;
    for (int c = 0; c < a.grid.dims; ++c)
        for (std::size_t i = 0; i < a.comp[c].size(); ++i) s += a.comp[c][i] * b.comp[c][i];
    return s * a.grid.cell_volume();
}

double inner_product(const DirectorField& a, const DirectorField& b) {
    require_same_grid(a.grid, b.grid, "inner_product");
    double s = 0.0;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < a.comp[c].size(); ++i) s += a.comp[c][i] * b.comp[c][i];
    return s * a.grid.cell_volume();
}

double lp_norm(const ScalarField& f, double p) {
    double s = 0.0;
    for (double v : f.values) s += std::pow(std::abs(v), p);
    return std::pow(s * f.grid.cell_volume(), 1.0 / p);
}

ScalarField sample_scalar(const Grid& g, const ScalarFn& fn) {
    ScalarField f(g);
    for_cells(g, [&](int x, int y, int z, std::size_t i) {
        f.values[i] = fn(g.center(0, x), g.center(1, y), g.center(2, z));
    });
    return f;
}

VectorField sample_vector(const Grid& g, const ScalarFn& fx, const ScalarFn& fy, const ScalarFn& fz) {
    VectorField v(g);
    const ScalarFn* fns[3] = {&fx, &fy, &fz};
    for (int a = 0; a < g.dims; ++a) {
        if (a == 2 && !fz) throw std::invalid_argument("sample_vector: missing z component");
        int n[3] = {g.res[0], g.res[1], g.res[2]};
        if (g.layout == Layout::staggered) n[a] = g.face_count(a);
        for (int z = 0; z < n[2]; ++z)
            for (int y = 0; y < n[1]; ++y)
                for (int x = 0; x < n[0]; ++x) {
                    int c[3] = {x, y, z};
                    double p[3];
                    for (int b = 0; b < 3; ++b)
                        p[b] = (g.layout == Layout::staggered && b == a) ? g.face_coord(b, c[b])
                                                                         : g.center(b, c[b]);
                    v.at(a, x, y, z) = (*fns[a])(p[0], p[1], p[2]);
                }
    }
    return v;
}

DirectorField sample_director(const Grid& g, const ScalarFn& f0, const ScalarFn& f1, const ScalarFn& f2) {
    DirectorField d(g);
    const ScalarFn* fns[3] = {&f0, &f1, &f2};
    for (int c = 0; c < 3; ++c)
        for_cells(g, [&](int x, int y, int z, std::size_t i) {
            d.comp[c][i] = (*fns[c])(g.center(0, x), g.center(1, y), g.center(2, z));
        });
    return d;
}

double max_abs_divergence(const VectorField& u) {
    ScalarField div = u.grid.layout == Layout::staggered ? divergence_faces(u)
                                                         : divergence_cells(u, GhostRule::odd);
    double m = 0.0;
    for (double v : div.values) m = std::max(m, std::abs(v));
    return m;
}

VectorField to_cell_centered(const VectorField& u) {
    const Grid& g = u.grid;
    if (g.layout == Layout::collocated) return u;
    Grid cg = g;
    cg.layout = Layout::collocated;
    VectorField out(cg);
    for (int a = 0; a < g.dims; ++a) {
        for_cells(cg, [&](int x, int y, int z, std::size_t i) {
            int c[3] = {x, y, z};
            int fl[3] = {x, y, z}, fr[3] = {x, y, z};
            fr[a] = c[a] + 1;
            if (g.bc == BcMode::periodic && fr[a] >= g.res[a]) fr[a] -= g.res[a];
            out.comp[a][i] = 0.5 * (u.at(a, fl[0], fl[1], fl[2]) + u.at(a, fr[0], fr[1], fr[2]));
        });
    }
    return out;
}

} // namespace nemthsim
