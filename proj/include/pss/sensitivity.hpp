#pragma once

#include <vector>

#include "pss/transient.hpp"

namespace pss {

/// Per-time-point MNA Jacobians along a stored trajectory, together with the
/// discretization of the run that produced it. The linear-response
/// integration must reproduce that discretization exactly.
struct SystemJacobians {
    Discretization disc;
    std::vector<Matrix> G_list;
    std::vector<Matrix> C_list;

    [[nodiscard]] int points() const { return static_cast<int>(G_list.size()); }
};

/// One-period state-transition derivative and period-derivative vector.
struct Monodromy {
    Matrix Phi_T;  // d x_T / d x0
    Vector Psi_T;  // -d x_T / d T0 = -x_dot at the endpoint
};

/// Evaluate G(t_k), C(t_k) at every stored sample of a tran_pss path.
SystemJacobians collect_gc(const MnaSystem& sys, const Waveform& path);

/// Propagate the identity through the differentiated companion recurrence of
/// the generating run, yielding the exact Jacobian of the discrete map
/// x0 -> x_T. Throws SingularMatrixError with the offending step index.
Matrix integrate_phi(const SystemJacobians& jacs);

/// As above, but cross-checks the caller's LMS configuration against the
/// discretization stored in jacs; any mismatch is a hard error.
Matrix integrate_phi(const SystemJacobians& jacs, const LmsConfig& config);

/// Endpoint time derivative (second-order backward difference on the mesh),
/// negated.
Vector period_derivative(const Waveform& path);

Monodromy monodromy(const MnaSystem& sys, const Waveform& path);

} // namespace pss
