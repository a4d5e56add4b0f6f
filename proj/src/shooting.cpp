#include "pss/shooting.hpp"

#include <algorithm>
#include <cmath>

namespace pss {

ShootingOptions ShootingOptions::from_card(const AnalysisCard& card) {
    ShootingOptions o;
    o.tper = card.tper;
    o.tstab = card.tstab;
    o.max_itr = card.max_itr;
    o.eps_max = card.eps_max;
    o.steps = card.steps_per_period;
    o.phase_node = card.phase_node;
    return o;
}

PhaseCondition phase_condition(const MnaIndexMap& map, const std::string& alpha_node,
                               const Vector& x0, const Vector& x_ref) {
    PhaseCondition pc;
    const int row = map.node_row(alpha_node);
    pc.alpha = Eigen::RowVectorXd::Zero(map.n);
    pc.alpha(row) = 1.0;
    pc.residual = x0(row) - x_ref(row);
    return pc;
}

namespace {

AnalysisCard card_from(const ShootingOptions& o) {
    AnalysisCard c;
    c.kind = AnalysisKind::Pss;
    c.tper = o.tper;
    c.tstab = o.tstab;
    c.max_itr = o.max_itr;
    c.eps_max = o.eps_max;
    c.steps_per_period = o.steps;
    c.phase_node = o.phase_node;
    return c;
}

void record(PssResult& res, int l, double residual, double T0, const Vector& x0,
            const Waveform& wave) {
    res.history.push_back({l, residual, T0, x0, wave});
}

} // namespace

PssResult shoot_driven(const MnaSystem& sys, double T0, const Vector& x_guess,
                       const ShootingOptions& opts) {
    if (!(T0 > 0.0)) throw ValidationError("shoot_driven: T0 must be positive");
    if (!sys.circuit().has_time_dependent_sources())
        throw ValidationError("shoot_driven: circuit has no time-periodic source");

    TransientIntegrator integ(sys);
    const int n = sys.n();
    PssResult res;
    res.f0 = 1.0 / T0;

    Vector x0 = x_guess;
    Waveform wave = integ.tran_pss(0.0, T0, x0, opts.steps);
    double eps = (x0 - wave.endpoint()).norm();
    record(res, 0, eps, T0, x0, wave);

    bool done = eps <= opts.eps_max;
    int l = 0;
    while (!done && l <= opts.max_itr) {
        Matrix phi = integrate_phi(collect_gc(sys, wave));
        Matrix jac = Matrix::Identity(n, n) - phi;
        Eigen::FullPivLU<Matrix> lu(jac);
        if (!lu.isInvertible())
            throw SingularJacobianError("I - Phi_T is singular (neutrally stable mode)");
        x0 -= lu.solve(x0 - wave.endpoint());
        wave = integ.tran_pss(0.0, T0, x0, opts.steps);
        eps = (x0 - wave.endpoint()).norm();
        ++l;
        record(res, l, eps, T0, x0, wave);
        done = eps <= opts.eps_max;
    }

    res.pss_waveform = wave;
    res.converged = done;
    res.iterations = l;
    res.monodromy = monodromy(sys, wave);
    if (!done) throw MaxIterationsError(std::move(res));
    return res;
}

PssResult shoot_autonomous(const MnaSystem& sys, const ShootingOptions& opts) {
    validate_pss_card(card_from(opts));
    if (sys.circuit().has_time_dependent_sources())
        throw ValidationError("shoot_autonomous: circuit has time-dependent sources");
    if (sys.circuit().nodes.empty())
        throw ValidationError("shoot_autonomous: circuit has no non-ground node");

    const int n = sys.n();
    const std::string phase_node =
        opts.phase_node.empty() ? sys.circuit().nodes.front() : opts.phase_node;
    const int phase_row = sys.index_map().node_row(phase_node);

    TransientIntegrator integ(sys);
    PssResult res;
    res.x_dc = sys.solve_dc();

    // Kick the phase node off the DC equilibrium so an oscillation can grow.
    Vector x_start = res.x_dc;
    x_start(phase_row) += 1e-3 * (1.0 + std::abs(res.x_dc(phase_row)));
    res.stab_waveform = integ.tran_init(0.0, opts.tstab, x_start, opts.tper / opts.steps);

    // Oscillation check over the trailing period of the stabilization run.
    {
        const auto& stab = res.stab_waveform;
        int window = std::min(stab.steps(),
                              std::max(2, static_cast<int>(std::llround(opts.tper / stab.dt))));
        double lo = stab.endpoint()(phase_row), hi = lo;
        for (int k = stab.steps() - window; k <= stab.steps(); ++k) {
            double v = stab.samples[static_cast<size_t>(k)](phase_row);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (0.5 * (hi - lo) < 1e-9)
            throw DegenerateOscillationError(
                "no oscillation at node " + phase_node + " after stabilization");
    }

    const double t0 = opts.tstab;
    double T0 = opts.tper;
    Vector x0 = res.stab_waveform.endpoint();
    Waveform wave = integ.tran_pss(t0, T0, x0, opts.steps);

    auto augmented_residual = [&](const Vector& xi, const Waveform& w) {
        PhaseCondition pc = phase_condition(sys.index_map(), phase_node, xi, res.x_dc);
        return std::sqrt((xi - w.endpoint()).squaredNorm() + pc.residual * pc.residual);
    };

    double eps = augmented_residual(x0, wave);
    record(res, 0, eps, T0, x0, wave);

    bool done = eps <= opts.eps_max;
    int l = 0;
    while (!done && l <= opts.max_itr) {
        Monodromy mon = monodromy(sys, wave);
        PhaseCondition pc = phase_condition(sys.index_map(), phase_node, x0, res.x_dc);

        Matrix jac = Matrix::Zero(n + 1, n + 1);
        jac.topLeftCorner(n, n) = Matrix::Identity(n, n) - mon.Phi_T;
        jac.block(0, n, n, 1) = mon.Psi_T;
        jac.block(n, 0, 1, n) = pc.alpha;

        Vector f(n + 1);
        f.head(n) = x0 - wave.endpoint();
        f(n) = pc.residual;

        Eigen::FullPivLU<Matrix> lu(jac);
        if (!lu.isInvertible())
            throw SingularJacobianError("augmented shooting Jacobian is singular");
        Vector delta = lu.solve(f);

        // Keep the period update sane: never let T0 flip sign or move by
        // more than half its value in one step.
        for (int guard = 0; guard < 60; ++guard) {
            double T_next = T0 - delta(n);
            if (T_next > 0.0 && std::abs(delta(n)) <= 0.5 * T0) break;
            delta *= 0.5;
        }

        x0 -= delta.head(n);
        T0 -= delta(n);
        wave = integ.tran_pss(t0, T0, x0, opts.steps);
        eps = augmented_residual(x0, wave);
        ++l;
        record(res, l, eps, T0, x0, wave);
        done = eps <= opts.eps_max;
    }

    res.pss_waveform = wave;
    res.f0 = 1.0 / T0;
    res.converged = done;
    res.iterations = l;
    res.monodromy = monodromy(sys, wave);
    if (!done) throw MaxIterationsError(std::move(res));
    return res;
}

} // namespace pss
