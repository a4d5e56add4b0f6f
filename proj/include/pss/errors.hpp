#pragma once

#include <stdexcept>
#include <string>

namespace pss {

/// Base class for all simulator errors.
struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed netlist line; carries the 1-based source location.
struct SyntaxError : SimError {
    SyntaxError(const std::string& msg, int line, int col)
        : SimError(std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
          line(line), col(col) {}
    int line;
    int col;
};

/// Structurally invalid circuit or analysis card (missing ground,
/// duplicate device name, non-positive R/L/C, out-of-range PSS parameter).
struct ValidationError : SimError {
    using SimError::SimError;
};

/// Device model evaluation failed (e.g. overflow in the diode exponential).
struct ModelEvalError : SimError {
    using SimError::SimError;
};

/// Referenced node does not exist in the circuit.
struct UnknownNodeError : SimError {
    using SimError::SimError;
};

/// Structurally or numerically singular linear system.
struct SingularMatrixError : SimError {
    using SimError::SimError;
};

/// DC operating-point solver exhausted all homotopy fallbacks.
struct NoConvergenceError : SimError {
    using SimError::SimError;
};

/// Per-step transient Newton failed; carries the offending time point.
struct StepNoConvergenceError : SimError {
    StepNoConvergenceError(const std::string& msg, double t)
        : SimError(msg + " at t=" + std::to_string(t)), time(t) {}
    double time;
};

/// Shooting Jacobian I - Phi_T (or its augmented form) is singular.
struct SingularJacobianError : SimError {
    using SimError::SimError;
};

/// The stabilized transient shows no oscillation at the phase node.
struct DegenerateOscillationError : SimError {
    using SimError::SimError;
};

/// Dataset file could not be written or read.
struct IoError : SimError {
    using SimError::SimError;
};

} // namespace pss
