#include "pss/transient.hpp"

#include <cmath>

namespace pss {

std::pair<Matrix, Vector> companion_assemble(const MnaEvaluation& ev, const LmsConfig& cfg,
                                             const LmsHistory& hist, const Vector& x) {
    Matrix A = cfg.a0 * ev.C + ev.G;
    Vector F = cfg.a0 * (ev.q - hist.q_prev) + ev.i + ev.s;
    if (hist.f_prev.size() > 0) F += hist.f_prev;
    return {A, A * x - F};
}

TransientIntegrator::TransientIntegrator(const MnaSystem& sys, LmsMethod method)
    : sys_(&sys), method_(method) {
    startup_ = (method == LmsMethod::Trapezoidal && !sys.has_algebraic_rows())
                   ? StartupMode::DaeHistory
                   : StartupMode::BackwardEulerStep;
}

Waveform TransientIntegrator::run(double t0, double dt, int steps, const Vector& x0) const {
    Waveform wave;
    wave.t0 = t0;
    wave.dt = dt;
    wave.labels = sys_->index_map().labels;
    wave.disc = {method_, startup_, t0, dt, steps};
    wave.samples.reserve(static_cast<size_t>(steps) + 1);
    wave.samples.push_back(x0);

    Vector x = x0;
    MnaEvaluation prev_ev = sys_->evaluate(x0, t0);

    for (int k = 1; k <= steps; ++k) {
        const double t = t0 + k * dt;
        const bool be = method_ == LmsMethod::BackwardEuler ||
                        (k == 1 && startup_ == StartupMode::BackwardEulerStep);
        const LmsConfig cfg = be ? LmsConfig::backward_euler(dt) : LmsConfig::trapezoidal(dt);

        LmsHistory hist;
        hist.q_prev = prev_ev.q;
        if (!be) hist.f_prev = prev_ev.i + prev_ev.s;

        MnaEvaluation ev;
        bool converged = false;
        int polish = -1; // one extra Newton update after the tolerance is met
        for (int iter = 0; iter < 60; ++iter) {
            ev = sys_->evaluate(x, t);
            if (polish == 0) break;
            Vector F = cfg.a0 * (ev.q - hist.q_prev) + ev.i + ev.s;
            if (hist.f_prev.size() > 0) F += hist.f_prev;
            const double tol = 1e-12 * (1.0 + x.lpNorm<Eigen::Infinity>());
            if (F.lpNorm<Eigen::Infinity>() <= tol) {
                converged = true;
                if (polish < 0) polish = 1;
            }
            Matrix A = cfg.a0 * ev.C + ev.G;
            Eigen::FullPivLU<Matrix> lu(A);
            if (!lu.isInvertible())
                throw SingularMatrixError("singular companion matrix at t=" + std::to_string(t));
            Vector dx = lu.solve(-F);
            x = sys_->limit_step(x + dx, x);
            if (polish > 0) --polish;
        }
        if (!converged)
            throw StepNoConvergenceError("transient step Newton did not converge", t);

        wave.samples.push_back(x);
        prev_ev = ev;
    }
    return wave;
}

Waveform TransientIntegrator::tran_init(double t_a, double t_b, const Vector& x_init,
                                        double dt) const {
    if (!(t_b > t_a)) throw SimError("tran_init: t_b must exceed t_a");
    if (!(dt > 0.0)) throw SimError("tran_init: dt must be positive");
    int steps = std::max(1, static_cast<int>(std::llround((t_b - t_a) / dt)));
    return run(t_a, (t_b - t_a) / steps, steps, x_init);
}

Waveform TransientIntegrator::tran_pss(double t0, double T0, const Vector& x0,
                                       int steps) const {
    if (!(T0 > 0.0)) throw SimError("tran_pss: T0 must be positive");
    if (steps < 2) throw SimError("tran_pss: need at least 2 steps");
    return run(t0, T0 / steps, steps, x0);
}

} // namespace pss
