#include "nemthsim/linsolve.hpp"

#include <cmath>

namespace nemthsim {

namespace {
double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}
} // namespace

CGResult conjugate_gradient(const LinearOperator& apply, const std::vector<double>& b,
                            std::vector<double>& x, const std::vector<double>* inv_diag,
                            const CGOptions& opt) {
    const std::size_t n = b.size();
    std::vector<double> r(n), z(n), p(n), Ap(n);

    apply(x, Ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - Ap[i];

    double bnorm = std::sqrt(dot(b, b));
    double target = std::max(opt.rel_tol * bnorm, opt.abs_tol);
    if (target == 0.0) target = 1e-300;

    auto precond = [&](const std::vector<double>& in, std::vector<double>& out) {
        if (inv_diag)
            for (std::size_t i = 0; i < n; ++i) out[i] = (*inv_diag)[i] * in[i];
        else
            out = in;
    };

    double rnorm = std::sqrt(dot(r, r));
    if (rnorm <= target) return {0, rnorm, true};

    precond(r, z);
    p = z;
    double rz = dot(r, z);

    CGResult res;
    for (int it = 1; it <= opt.max_iter; ++it) {
        apply(p, Ap);
        double pAp = dot(p, Ap);
        if (pAp == 0.0) break; // p in the null space; b was inconsistent
        double alpha = rz / pAp;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        rnorm = std::sqrt(dot(r, r));
        if (rnorm <= target) return {it, rnorm, true};
        precond(r, z);
        double rz_new = dot(r, z);
        double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        res.iterations = it;
    }
    res.residual = rnorm;
    res.converged = false;
    return res;
}

} // namespace nemthsim
