#pragma once

#include <Eigen/Dense>

#include "pss/netlist.hpp"

namespace pss {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Consistent evaluation of the MNA vector functions and their Jacobians
/// at a given state and time: q(x), i(x), s(t), G = di/dx, C = dq/dx.
struct MnaEvaluation {
    Vector q;
    Vector i;
    Vector s;
    Matrix G;
    Matrix C;
    /// Net current stamped into the (eliminated) ground row; used by the
    /// KCL closure tests.
    double ground_current = 0.0;
};

/// Circuit bound to its MNA index map. All evaluation entry points are
/// pure functions of (x, t) and safe for concurrent calls.
class MnaSystem {
  public:
    explicit MnaSystem(Circuit circuit);

    [[nodiscard]] const Circuit& circuit() const { return circuit_; }
    [[nodiscard]] const MnaIndexMap& index_map() const { return map_; }
    [[nodiscard]] int n() const { return map_.n; }

    [[nodiscard]] MnaEvaluation evaluate(const Vector& x, double t) const;

    /// Newton DC solve with gmin/source-stepping homotopy fallback.
    /// Solves i(x) + s(0) = 0 to ||.||_inf <= 1e-12 * (1 + ||s(0)||_inf).
    [[nodiscard]] Vector solve_dc() const;

    /// Junction-voltage step limiting for exponential devices. Returns the
    /// adjusted candidate state given the previous Newton iterate.
    [[nodiscard]] Vector limit_step(const Vector& x_new, const Vector& x_old) const;

    /// True if any row of C carries no reactive stamp (index > 0 DAE rows).
    [[nodiscard]] bool has_algebraic_rows() const;

  private:
    Vector solve_dc_newton(Vector x, double gmin, double source_scale,
                           int max_iter, bool& ok) const;

    Circuit circuit_;
    MnaIndexMap map_;
};

/// Thermal voltage used by the diode model (V).
inline constexpr double kDiodeVt = 25.852e-3;

} // namespace pss
