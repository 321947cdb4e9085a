#pragma once

#include <stdexcept>
#include <string>

namespace nemthsim {

/// Linear solver failed to reach its tolerance.
struct SolverError : std::runtime_error {
    int iterations;
    double residual;
    SolverError(const std::string& what, int it, double res)
        : std::runtime_error(what + " (iterations=" + std::to_string(it) +
                             ", residual=" + std::to_string(res) + ")"),
          iterations(it), residual(res) {}
};

/// A discrete invariant the scheme is supposed to guarantee was violated.
/// Raised instead of continuing silently; indicates a scheme defect or an
/// inadmissible configuration, not a recoverable runtime condition.
struct SchemeDefect : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Configuration parse or validation failure; message names the offending key.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace nemthsim
