#pragma once

#include <stdexcept>
#include <string>

namespace fpkd {

/// Base class of all solver failures.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Field/grid dimensions disagree, or control classes are mixed up.
struct ShapeMismatch : SolverError {
    using SolverError::SolverError;
};

/// A PDE sweep lost mass, produced non-finite values, or the time step
/// violates the diffusion stability bound.
struct UnstableStep : SolverError {
    using SolverError::SolverError;
};

/// An operation that requires a density trajectory was called without one.
struct MissingDensity : SolverError {
    using SolverError::SolverError;
};

/// A descent iteration increased the cost beyond tolerance; treated as a
/// solver bug, never silently accepted.
struct MonotonicityViolation : SolverError {
    using SolverError::SolverError;
};

/// A Monte Carlo path left the finite range.
struct NonFinitePath : SolverError {
    using SolverError::SolverError;
};

/// Problem definition rejected by validation.
struct InvalidSpec : SolverError {
    using SolverError::SolverError;
};

/// Configuration text rejected; carries the offending line when known.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line_no(line) {}

    int line_no;
};

} // namespace fpkd
