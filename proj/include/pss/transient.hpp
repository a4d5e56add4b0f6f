#pragma once

#include <utility>
#include <vector>

#include "pss/mna.hpp"

namespace pss {

enum class LmsMethod { BackwardEuler, Trapezoidal };

/// How the first step of a fixed-mesh run obtains its LMS history.
///  - DaeHistory: pure trapezoidal from the start; the initial history term
///    q_dot(t0) = -(i(x0) + s(t0)) is read directly off the circuit equations.
///    Requires a nonsingular C (no algebraic rows).
///  - BackwardEulerStep: one BE step, trapezoidal afterwards. Damps
///    inconsistent algebraic components of the initial state.
enum class StartupMode { DaeHistory, BackwardEulerStep };

struct LmsConfig {
    LmsMethod method = LmsMethod::Trapezoidal;
    double a0 = 0.0; // leading LMS coefficient (1/dt for BE, 2/dt for trapezoidal)

    static LmsConfig backward_euler(double dt) { return {LmsMethod::BackwardEuler, 1.0 / dt}; }
    static LmsConfig trapezoidal(double dt) { return {LmsMethod::Trapezoidal, 2.0 / dt}; }
};

/// Mesh + method metadata a sensitivity integration must reproduce exactly.
struct Discretization {
    LmsMethod method = LmsMethod::Trapezoidal;
    StartupMode startup = StartupMode::BackwardEulerStep;
    double t0 = 0.0;
    double dt = 0.0;
    int steps = 0;
};

/// Uniform-mesh trajectory of MNA states.
struct Waveform {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<Vector> samples; // length steps+1; samples[0] == initial condition
    std::vector<std::string> labels;
    Discretization disc;

    [[nodiscard]] int steps() const { return static_cast<int>(samples.size()) - 1; }
    [[nodiscard]] double time(int k) const { return t0 + k * dt; }
    [[nodiscard]] const Vector& endpoint() const { return samples.back(); }
};

/// History terms carried between LMS steps.
struct LmsHistory {
    Vector q_prev; // q at the previous accepted point
    Vector f_prev; // i + s at the previous point (trapezoidal); zero for BE
};

/// Companion-form system for one implicit step at iterate x:
/// A = a0*C + G, rhs = A*x - F where F is the discretized residual.
/// The converged step satisfies A*x = rhs.
std::pair<Matrix, Vector> companion_assemble(const MnaEvaluation& ev, const LmsConfig& cfg,
                                             const LmsHistory& hist, const Vector& x);

class TransientIntegrator {
  public:
    explicit TransientIntegrator(const MnaSystem& sys,
                                 LmsMethod method = LmsMethod::Trapezoidal);

    /// Stabilization run over [t_a, t_b] with requested step size (snapped to
    /// a uniform mesh).
    [[nodiscard]] Waveform tran_init(double t_a, double t_b, const Vector& x_init,
                                     double dt) const;

    /// One-period run on the fixed mesh dt = T0/steps. Stateless between
    /// calls: identical arguments give bit-identical results.
    [[nodiscard]] Waveform tran_pss(double t0, double T0, const Vector& x0, int steps) const;

    [[nodiscard]] StartupMode startup_mode() const { return startup_; }
    [[nodiscard]] const MnaSystem& system() const { return *sys_; }

  private:
    [[nodiscard]] Waveform run(double t0, double dt, int steps, const Vector& x0) const;

    const MnaSystem* sys_;
    LmsMethod method_;
    StartupMode startup_;
};

} // namespace pss
