#include <doctest.h>

#include "support.hpp"

using namespace pss;

namespace {

// consistent initial state for the DC-driven RC lowpass (v1, v2, iV1)
Vector rc_dc_start() {
    Vector x(3);
    x << 1.0, 0.0, -1e-3;
    return x;
}

MnaSystem rc_dc_system() {
    return MnaSystem(parse_netlist("V1 1 0 DC 1\nR1 1 2 1k\nC1 2 0 1n\n"));
}

} // namespace

TEST_CASE("companion matrix arithmetic") {
    MnaEvaluation ev;
    ev.q = Vector::Zero(1);
    ev.i = Vector::Zero(1);
    ev.s = Vector::Zero(1);
    ev.C = Matrix::Constant(1, 1, 1e-9);
    ev.G = Matrix::Constant(1, 1, 1e-3);
    LmsHistory hist;
    hist.q_prev = Vector::Zero(1);
    Vector x = Vector::Zero(1);

    auto [A_be, rhs_be] = companion_assemble(ev, LmsConfig::backward_euler(1e-6), hist, x);
    CHECK(A_be(0, 0) == doctest::Approx(2e-3));
    auto [A_tr, rhs_tr] = companion_assemble(ev, LmsConfig::trapezoidal(1e-6), hist, x);
    CHECK(A_tr(0, 0) == doctest::Approx(3e-3));

    ev.C.setZero();
    auto [A_res, rhs_res] = companion_assemble(ev, LmsConfig::trapezoidal(1e-6), hist, x);
    CHECK(A_res == ev.G); // purely resistive: A = G for any dt
}

TEST_CASE("C recovery from the companion matrix: (A - G)/a0 == C") {
    MnaSystem sys(parse_netlist(
        "V1 1 0 SIN 0 1 1e6 0\nR1 1 2 1k\nC1 2 0 1n\nL1 2 3 1u\nR2 3 0 50\n"));
    Vector x = Vector::Constant(sys.n(), 0.25);
    MnaEvaluation ev = sys.evaluate(x, 1e-7);
    LmsHistory hist;
    hist.q_prev = Vector::Zero(sys.n());
    for (double dt : {1e-9, 1e-8, 2.5e-7}) {
        LmsConfig cfg = LmsConfig::trapezoidal(dt);
        auto [A, rhs] = companion_assemble(ev, cfg, hist, x);
        CHECK(((A - ev.G) / cfg.a0 - ev.C).cwiseAbs().maxCoeff() < 1e-24);
    }
}

TEST_CASE("RC lowpass step response reaches 1 V at t = 10 RC") {
    MnaSystem sys = rc_dc_system();
    TransientIntegrator integ(sys);
    Waveform w = integ.tran_init(0.0, 10e-6, rc_dc_start(), 1e-8);
    CHECK(w.samples.front() == rc_dc_start());
    const int v2 = sys.index_map().node_row("2");
    CHECK(w.endpoint()(v2) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("zero-source RLC stays at equilibrium") {
    MnaSystem sys(parse_netlist("R1 1 0 1k\nC1 1 0 1n\nL1 1 0 1u\n"));
    TransientIntegrator integ(sys);
    Waveform w = integ.tran_init(0.0, 1e-6, Vector::Zero(sys.n()), 1e-9);
    for (const auto& x : w.samples) CHECK(x.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("VDP stabilization amplitude agrees with a dt/4 reference run") {
    MnaSystem sys(pss::test::load_circuit("vdp.cir"));
    TransientIntegrator integ(sys);
    Vector x0 = Vector::Zero(sys.n());
    x0(0) = 1e-3;
    auto amplitude = [&](double dt) {
        Waveform w = integ.tran_init(0.0, 40e-9, x0, dt);
        const int last_period = static_cast<int>(std::llround(1.115e-9 / w.dt));
        double amp = 0.0;
        for (int k = w.steps() - last_period; k <= w.steps(); ++k)
            amp = std::max(amp, std::abs(w.samples[static_cast<size_t>(k)](0)));
        return amp;
    };
    const double coarse = amplitude(1e-9 / 256);
    const double fine = amplitude(1e-9 / 1024);
    CHECK(coarse == doctest::Approx(fine).epsilon(0.01));
}

TEST_CASE("tran_pss is deterministic: equal arguments, bit-identical output") {
    MnaSystem sys(pss::test::load_circuit("rectifier.cir"));
    TransientIntegrator integ(sys);
    Vector x0 = sys.solve_dc();
    Waveform a = integ.tran_pss(0.0, 1e-6, x0, 128);
    Waveform b = integ.tran_pss(0.0, 1e-6, x0, 128);
    REQUIRE(a.samples.size() == b.samples.size());
    for (size_t k = 0; k < a.samples.size(); ++k)
        CHECK(a.samples[k] == b.samples[k]); // exact, not approximate
}

TEST_CASE("tran_pss from the exact discrete periodic state returns to it") {
    // The driven-RC one-period map is affine: x_T = M x + b. Build M and b
    // exactly from n+1 integrations and check the fixed point.
    MnaSystem sys(parse_netlist("V1 1 0 SIN 0 1 1e6 0\nR1 1 2 1k\nC1 2 0 1n\n"));
    TransientIntegrator integ(sys);
    const int n = sys.n();
    const double T = 1e-6;
    const int steps = 256;
    Vector b = integ.tran_pss(0.0, T, Vector::Zero(n), steps).endpoint();
    Matrix M(n, n);
    for (int j = 0; j < n; ++j) {
        Vector e = Vector::Zero(n);
        e(j) = 1.0;
        M.col(j) = integ.tran_pss(0.0, T, e, steps).endpoint() - b;
    }
    Vector x_star = (Matrix::Identity(n, n) - M).fullPivLu().solve(b);
    Vector x_T = integ.tran_pss(0.0, T, x_star, steps).endpoint();
    CHECK((x_star - x_T).norm() < 1e-9);
}

TEST_CASE("doubling the step count shrinks the endpoint change ~4x (trapezoidal)") {
    MnaSystem sys(parse_netlist("V1 1 0 SIN 0 1 1e6 0\nR1 1 2 1k\nC1 2 0 1n\n"));
    TransientIntegrator integ(sys);
    Vector x0 = Vector::Zero(sys.n());
    const double T = 1e-6;
    Vector ref = integ.tran_pss(0.0, T, x0, 8192).endpoint();
    double d1 = (integ.tran_pss(0.0, T, x0, 256).endpoint() - ref).norm();
    double d2 = (integ.tran_pss(0.0, T, x0, 512).endpoint() - ref).norm();
    CHECK(d1 / d2 == doctest::Approx(4.0).epsilon(0.3));
}

TEST_CASE("global endpoint error order: O(dt) BE, O(dt^2) trapezoidal") {
    MnaSystem sys = rc_dc_system();
    const int v2 = sys.index_map().node_row("2");
    auto endpoint_error = [&](LmsMethod method, int steps) {
        TransientIntegrator integ(sys, method);
        Waveform w = integ.tran_pss(0.0, 2e-6, rc_dc_start(), steps);
        const double exact = 1.0 - std::exp(-2e-6 / 1e-6);
        return std::abs(w.endpoint()(v2) - exact);
    };
    for (LmsMethod method : {LmsMethod::BackwardEuler, LmsMethod::Trapezoidal}) {
        double e1 = endpoint_error(method, 64);
        double e2 = endpoint_error(method, 128);
        double slope = std::log2(e1 / e2);
        double expected = method == LmsMethod::BackwardEuler ? 1.0 : 2.0;
        CHECK(slope == doctest::Approx(expected).epsilon(0.1));
    }
}

TEST_CASE("lossless LC tank: trapezoidal preserves energy over one period") {
    MnaSystem sys(parse_netlist("L1 1 0 31.4n\nC1 1 0 1p\n"));
    TransientIntegrator integ(sys);
    REQUIRE(integ.startup_mode() == StartupMode::DaeHistory);
    const double L = 31.4e-9, C = 1e-12;
    const double T = 2.0 * M_PI * std::sqrt(L * C);
    Vector x0(sys.n());
    x0.setZero();
    x0(sys.index_map().node_row("1")) = 1.0;
    Waveform w = integ.tran_pss(0.0, T, x0, 256);
    auto energy = [&](const Vector& x) {
        double v = x(sys.index_map().node_row("1"));
        double il = x(sys.index_map().branch_rows.at("L1"));
        return 0.5 * C * v * v + 0.5 * L * il * il;
    };
    CHECK(energy(w.endpoint()) == doctest::Approx(energy(x0)).epsilon(1e-3));
}

TEST_CASE("per-step Newton failure reports the time point") {
    MnaSystem sys = rc_dc_system();
    TransientIntegrator integ(sys);
    CHECK_THROWS_AS((void)integ.tran_init(0.0, 0.0, rc_dc_start(), 1e-9), SimError);
    CHECK_THROWS_AS((void)integ.tran_pss(0.0, -1e-6, rc_dc_start(), 64), SimError);
}
