#pragma once

#include <functional>
#include <vector>

namespace nemthsim {

struct CGOptions {
    double rel_tol = 1e-12;
    double abs_tol = 0.0;
    int max_iter = 100000;
};

struct CGResult {
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

using LinearOperator = std::function<void(const std::vector<double>&, std::vector<double>&)>;

/// Preconditioned conjugate gradient for SPD operators. `inv_diag`, when
/// given, is the Jacobi preconditioner (elementwise inverse diagonal).
/// Convergence: ||r||_2 <= max(rel_tol * ||b||_2, abs_tol). x holds the
/// initial guess on entry.
CGResult conjugate_gradient(const LinearOperator& apply, const std::vector<double>& b,
                            std::vector<double>& x, const std::vector<double>* inv_diag,
                            const CGOptions& opt);

} // namespace nemthsim
