#include "nemthsim/constitutive.hpp"

#include <cmath>

namespace nemthsim {

void require_positive_theta(const ScalarField& theta, const char* what) {
    if (theta.min() <= kThetaFloor)
        throw std::invalid_argument(std::string(what) + ": temperature must be strictly positive");
}

ScalarField gl_potential(const DirectorField& d, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("gl_potential: eps must be positive");
    ScalarField out(d.grid);
    double inv = 1.0 / (4.0 * eps * eps);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double n2 = d.comp[0][i] * d.comp[0][i] + d.comp[1][i] * d.comp[1][i] + d.comp[2][i] * d.comp[2][i];
        double r = n2 - 1.0;
        out.values[i] = r * r * inv;
    }
    return out;
}

DirectorField gl_force(const DirectorField& d, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("gl_force: eps must be positive");
    DirectorField out(d.grid);
    double inv = 1.0 / (eps * eps);
    for (std::size_t i = 0; i < d.comp[0].size(); ++i) {
        double n2 = d.comp[0][i] * d.comp[0][i] + d.comp[1][i] * d.comp[1][i] + d.comp[2][i] * d.comp[2][i];
        double c = (n2 - 1.0) * inv;
        for (int k = 0; k < 3; ++k) out.comp[k][i] = c * d.comp[k][i];
    }
    return out;
}

VectorField heat_flux(const ScalarField& theta, const DirectorField& d, const CoefficientSet& co) {
    require_positive_theta(theta, "heat_flux");
    require_same_grid(theta.grid, d.grid, "heat_flux");
    VectorField grad = gradient_cells(theta, GhostRule::even);
    VectorField q(grad.grid);
    const int dims = theta.grid.dims;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        double th = theta.values[i];
        double kv = co.k.eval(th), hv = co.h.eval(th);
        double gd = 0.0;
        for (int a = 0; a < dims; ++a) gd += grad.comp[a][i] * d.comp[a][i];
        for (int a = 0; a < dims; ++a)
            q.comp[a][i] = -kv * grad.comp[a][i] - hv * gd * d.comp[a][i];
    }
    return q;
}

VectorField entropy_flux(const ScalarField& theta, const DirectorField& d, const CoefficientSet& co) {
    VectorField g = heat_flux(theta, d, co);
    for (int a = 0; a < theta.grid.dims; ++a)
        for (std::size_t i = 0; i < theta.size(); ++i) g.comp[a][i] /= theta.values[i];
    return g;
}

ScalarField entropy_density(const ScalarField& theta) {
    require_positive_theta(theta, "entropy_density");
    ScalarField out(theta.grid);
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = 1.0 + std::log(theta.values[i]);
    return out;
}

ThermoFields free_energy_density(const State& s) {
    require_positive_theta(s.theta, "free_energy_density");
    const Grid& g = s.theta.grid;
    MatrixField gd = director_gradient(s.d);
    ScalarField elastic(g);
    for (std::size_t i = 0; i < elastic.size(); ++i) {
        double acc = 0.0;
        for (int a = 0; a < g.dims; ++a)
            for (int k = 0; k < 3; ++k) acc += gd.at(a, k, i) * gd.at(a, k, i);
        elastic.values[i] = 0.5 * acc;
    }
    ScalarField penalty = s.reg.limit ? ScalarField(g, 0.0) : gl_potential(s.d, s.reg.eps);
    ThermoFields out{ScalarField(g), ScalarField(g), entropy_density(s.theta)};
    for (std::size_t i = 0; i < g.cells(); ++i) {
        double th = s.theta.values[i];
        double base = elastic.values[i] + penalty.values[i];
        out.psi.values[i] = base - th * std::log(th);
        out.e_int.values[i] = base + th;
    }
    return out;
}

DirectorField director_tension(const DirectorField& d, const Regularization& reg) {
    DirectorField lap = laplacian(d);
    if (!reg.limit) {
        DirectorField f = gl_force(d, reg.eps);
        for (int k = 0; k < 3; ++k)
            for (std::size_t i = 0; i < lap.comp[k].size(); ++i) lap.comp[k][i] -= f.comp[k][i];
        return lap;
    }
    MatrixField gd = director_gradient(d);
    const Grid& g = d.grid;
    for (std::size_t i = 0; i < g.cells(); ++i) {
        double g2 = 0.0;
        for (int a = 0; a < g.dims; ++a)
            for (int k = 0; k < 3; ++k) g2 += gd.at(a, k, i) * gd.at(a, k, i);
        for (int k = 0; k < 3; ++k) lap.comp[k][i] += g2 * d.comp[k][i];
    }
    return lap;
}

ScalarField entropy_production(const State& s, const CoefficientSet& co) {
    require_positive_theta(s.theta, "entropy_production");
    const Grid& g = s.theta.grid;
    VectorField uc = to_cell_centered(s.u);
    MatrixField gu = gradient_tensor(uc, GhostRule::odd);
    DirectorField tension = director_tension(s.d, s.reg);
    VectorField gth = gradient_cells(s.theta, GhostRule::even);

    ScalarField out(g);
    for (std::size_t i = 0; i < g.cells(); ++i) {
        double th = s.theta.values[i];
        double mu = co.mu.eval(th), kv = co.k.eval(th), hv = co.h.eval(th);
        double gu2 = 0.0;
        for (int a = 0; a < g.dims; ++a)
            for (int b = 0; b < g.dims; ++b) gu2 += gu.at(a, b, i) * gu.at(a, b, i);
        double t2 = 0.0;
        for (int k = 0; k < 3; ++k) t2 += tension.comp[k][i] * tension.comp[k][i];
        double gth2 = 0.0, gthd = 0.0;
        for (int a = 0; a < g.dims; ++a) {
            gth2 += gth.comp[a][i] * gth.comp[a][i];
            gthd += gth.comp[a][i] * s.d.comp[a][i];
        }
        // sum of squares with positive weights: nonnegative by construction
        out.values[i] = (mu * gu2 + t2 + kv * gth2 + hv * gthd * gthd) / th;
    }
    return out;
}

VectorField sigma_flux(const State& s, const DirectorField& ddt, const CoefficientSet& co) {
    const Grid& g = s.theta.grid;
    VectorField uc = to_cell_centered(s.u);
    MatrixField gu = gradient_tensor(uc, GhostRule::odd);
    MatrixField gd = director_gradient(s.d);
    Grid cg = g;
    cg.layout = Layout::collocated;
    VectorField sigma(cg);
    for (std::size_t i = 0; i < g.cells(); ++i) {
        double mu = co.mu.eval(s.theta.values[i]);
        for (int a = 0; a < g.dims; ++a) {
            double val = s.P.values[i] * uc.comp[a][i];
            for (int j = 0; j < g.dims; ++j) {
                val -= mu * uc.comp[j][i] * gu.at(a, j, i);
                double odod = 0.0; // (grad d o grad d)_{aj}
                for (int k = 0; k < 3; ++k) odod += gd.at(a, k, i) * gd.at(j, k, i);
                val += odod * uc.comp[j][i];
            }
            for (int k = 0; k < 3; ++k) val -= gd.at(a, k, i) * ddt.comp[k][i];
            sigma.comp[a][i] = val;
        }
    }
    return sigma;
}

} // namespace nemthsim
