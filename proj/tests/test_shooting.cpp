#include <doctest.h>

#include "support.hpp"

using namespace pss;

namespace {

const AnalysisCard& pss_card(const Circuit& c) {
    return *c.find_analysis(AnalysisKind::Pss);
}

ShootingOptions opts_from(const Circuit& c) {
    return ShootingOptions::from_card(pss_card(c));
}

} // namespace

TEST_CASE("phase anchoring residual and gradient") {
    MnaIndexMap map = node_index_map(parse_netlist("R1 a 0 1k\nC1 a 0 1n\nR2 b a 1k\n"));
    Vector x0(2), ref(2);
    x0 << 0.25, -0.5;
    ref << 0.1, 0.4;
    PhaseCondition pc = phase_condition(map, "a", x0, ref);
    CHECK(pc.residual == doctest::Approx(x0(map.node_row("a")) - ref(map.node_row("a"))));
    CHECK(pc.alpha.sum() == 1.0);
    CHECK(pc.alpha(map.node_row("a")) == 1.0);
    CHECK(phase_condition(map, "a", ref, ref).residual == 0.0);
    CHECK_THROWS_AS((void)phase_condition(map, "nope", x0, ref), UnknownNodeError);
}

TEST_CASE("driven linear circuit converges in one Newton iteration") {
    Circuit c = pss::test::load_circuit("linear_rc.cir");
    MnaSystem sys(c);
    PssResult r = shoot_driven(sys, pss_card(c).tper, Vector::Zero(sys.n()), opts_from(c));
    CHECK(r.converged);
    CHECK(r.iterations == 1);
    CHECK(r.history.back().residual <= 1e-12);
    CHECK(r.f0 == doctest::Approx(1e6));
}

TEST_CASE("a fixed point is recognized without any Newton update") {
    Circuit c = pss::test::load_circuit("linear_rc.cir");
    MnaSystem sys(c);
    ShootingOptions opts = opts_from(c);
    PssResult first = shoot_driven(sys, pss_card(c).tper, Vector::Zero(sys.n()), opts);
    PssResult again = shoot_driven(sys, pss_card(c).tper, first.pss_waveform.samples[0], opts);
    CHECK(again.converged);
    CHECK(again.iterations == 0);
    // fresh one-period re-integration closes on itself
    TransientIntegrator integ(sys);
    Waveform redo = integ.tran_pss(0.0, pss_card(c).tper, first.pss_waveform.samples[0],
                                   opts.steps);
    CHECK((redo.endpoint() - redo.samples[0]).norm() <= 2.0 * opts.eps_max);
}

TEST_CASE("rectifier PSS agrees with a 100-period brute-force transient") {
    Circuit c = pss::test::load_circuit("rectifier.cir");
    MnaSystem sys(c);
    ShootingOptions opts = opts_from(c);
    opts.steps = 8192; // resolve the startup step so both orbits coincide
    const double T = pss_card(c).tper;
    PssResult r = shoot_driven(sys, T, sys.solve_dc(), opts);
    REQUIRE(r.converged);

    TransientIntegrator integ(sys);
    Waveform longrun = integ.tran_init(0.0, 100.0 * T, sys.solve_dc(), T / opts.steps);
    const int out = sys.index_map().node_row("out");
    const int tail = longrun.steps() - opts.steps;
    double acc = 0.0;
    for (int k = 0; k <= opts.steps; ++k) {
        double d = longrun.samples[static_cast<size_t>(tail + k)](out) -
                   r.pss_waveform.samples[static_cast<size_t>(k)](out);
        acc += d * d;
    }
    CHECK(std::sqrt(acc / (opts.steps + 1)) < 1e-6);
}

TEST_CASE("oscillator run converges and reports a sensible frequency") {
    Circuit c = pss::test::load_circuit("vdp.cir");
    MnaSystem sys(c);
    PssResult r = shoot_autonomous(sys, opts_from(c));
    CHECK(r.converged);
    CHECK(r.history.back().residual <= 1e-12);
    // LC tank: f ~ 1/(2 pi sqrt(LC)) = 898.7 MHz, pulled slightly by the loss terms
    CHECK(r.f0 == doctest::Approx(8.987e8).epsilon(0.01));
    CHECK(r.iterations >= 1);
    CHECK(r.x_dc.lpNorm<Eigen::Infinity>() <= 1e-12);

    SUBCASE("converged orbit is a fixed point of a fresh re-integration") {
        TransientIntegrator integ(sys);
        Waveform redo = integ.tran_pss(0.0, 1.0 / r.f0, r.pss_waveform.samples[0],
                                       pss_card(c).steps_per_period);
        CHECK((redo.endpoint() - redo.samples[0]).norm() <= 2.0 * pss_card(c).eps_max);
    }

    SUBCASE("Floquet multipliers: one at unity, the rest inside the unit circle") {
        Eigen::EigenSolver<Matrix> es(r.monodromy.Phi_T);
        Eigen::VectorXd mags = es.eigenvalues().cwiseAbs();
        int unity = 0;
        for (int j = 0; j < mags.size(); ++j) {
            if (std::abs(es.eigenvalues()(j) - 1.0) < 1e-6)
                ++unity;
            else
                CHECK(mags(j) < 1.0);
        }
        CHECK(unity == 1);
    }

    SUBCASE("mesh-shifted starting points are fixed points too") {
        TransientIntegrator integ(sys);
        const double T0 = 1.0 / r.f0;
        const int m = pss_card(c).steps_per_period;
        for (int shift : {m / 4, m / 2, 3 * m / 4}) {
            Vector xs = r.pss_waveform.samples[static_cast<size_t>(shift)];
            Vector back = integ.tran_pss(0.0, T0, xs, m).endpoint();
            CHECK((back - xs).norm() / xs.norm() < 1e-10);
        }
    }

    SUBCASE("residual history is strictly decreasing over the convergence tail") {
        size_t start = r.history.size() > 4 ? r.history.size() - 4 : 1;
        for (size_t l = start; l < r.history.size(); ++l)
            CHECK(r.history[l].residual < r.history[l - 1].residual);
    }
}

TEST_CASE("oscillator converges from a 6 percent detuned period guess") {
    Circuit c = pss::test::load_circuit("vdp.cir");
    MnaSystem sys(c);
    ShootingOptions opts = opts_from(c);
    PssResult base = shoot_autonomous(sys, opts);
    opts.tper = 1.06 / base.f0;
    PssResult detuned = shoot_autonomous(sys, opts);
    CHECK(detuned.converged);
    CHECK(detuned.f0 == doctest::Approx(base.f0).epsilon(1e-9));
}

TEST_CASE("non-oscillating circuit raises DegenerateOscillationError") {
    // positive small-signal damping: the DC point is stable, nothing grows
    Circuit c = parse_netlist(
        "B1 1 0 POLY 0 1e-3 0 100e-6\nL1 1 0 31.4n\nC1 1 0 1p\nR1 1 0 10k\n"
        ".PSS TPER=1n TSTAB=30.5n MAXITR=50 EPSMAX=1e-12 STEPS=256 PHASENODE=1\n");
    MnaSystem sys(c);
    CHECK_THROWS_AS((void)shoot_autonomous(sys, opts_from(c)), DegenerateOscillationError);
}

TEST_CASE("MaxItr exhaustion carries the partial result") {
    Circuit c = pss::test::load_circuit("vdp.cir");
    MnaSystem sys(c);
    ShootingOptions opts = opts_from(c);
    opts.eps_max = 1e-300; // below the attainable floor, must exhaust MaxItr
    try {
        (void)shoot_autonomous(sys, opts);
        FAIL("expected MaxIterationsError");
    } catch (const MaxIterationsError& e) {
        CHECK_FALSE(e.partial.converged);
        CHECK(e.partial.history.size() >= 2);
        CHECK(e.partial.pss_waveform.steps() == opts.steps);
    }
}
