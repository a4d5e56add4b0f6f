#include "pss/sensitivity.hpp"

#include <cmath>
#include <string>

namespace pss {

SystemJacobians collect_gc(const MnaSystem& sys, const Waveform& path) {
    SystemJacobians jacs;
    jacs.disc = path.disc;
    jacs.G_list.reserve(path.samples.size());
    jacs.C_list.reserve(path.samples.size());
    for (size_t k = 0; k < path.samples.size(); ++k) {
        MnaEvaluation ev = sys.evaluate(path.samples[k], path.time(static_cast<int>(k)));
        jacs.G_list.push_back(std::move(ev.G));
        jacs.C_list.push_back(std::move(ev.C));
    }
    return jacs;
}

Matrix integrate_phi(const SystemJacobians& jacs) {
    const Discretization& disc = jacs.disc;
    if (jacs.points() != disc.steps + 1)
        throw SimError("integrate_phi: Jacobian list does not match the stored mesh");
    const int n = static_cast<int>(jacs.G_list.front().rows());
    const double dt = disc.dt;

    Matrix phi = Matrix::Identity(n, n);
    for (int k = 1; k <= disc.steps; ++k) {
        const bool be = disc.method == LmsMethod::BackwardEuler ||
                        (k == 1 && disc.startup == StartupMode::BackwardEulerStep);
        const double a0 = be ? 1.0 / dt : 2.0 / dt;
        // Differentiated companion recurrence:
        //   (a0*C_k + G_k) Phi_k = (a0*C_{k-1} - [trap] G_{k-1}) Phi_{k-1}
        Matrix A = a0 * jacs.C_list[static_cast<size_t>(k)] + jacs.G_list[static_cast<size_t>(k)];
        Matrix B = a0 * jacs.C_list[static_cast<size_t>(k - 1)];
        if (!be) B -= jacs.G_list[static_cast<size_t>(k - 1)];
        Eigen::PartialPivLU<Matrix> lu(A);
        if (lu.rcond() < 1e-14)
            throw SingularMatrixError("singular linear-response system at step " +
                                      std::to_string(k));
        phi = lu.solve(B * phi);
    }
    return phi;
}

Matrix integrate_phi(const SystemJacobians& jacs, const LmsConfig& config) {
    const double dt = jacs.disc.dt;
    const double expected_a0 =
        config.method == LmsMethod::BackwardEuler ? 1.0 / dt : 2.0 / dt;
    if (config.method != jacs.disc.method ||
        std::abs(config.a0 - expected_a0) > 1e-9 * expected_a0)
        throw SimError("integrate_phi: LMS configuration does not match the generating run");
    return integrate_phi(jacs);
}

Vector period_derivative(const Waveform& path) {
    const int m = path.steps();
    if (m < 2) throw SimError("period_derivative: need at least 2 steps");
    const Vector& xm = path.samples[static_cast<size_t>(m)];
    const Vector& x1 = path.samples[static_cast<size_t>(m - 1)];
    const Vector& x2 = path.samples[static_cast<size_t>(m - 2)];
    Vector xdot = (3.0 * xm - 4.0 * x1 + x2) / (2.0 * path.dt);
    return -xdot;
}

Monodromy monodromy(const MnaSystem& sys, const Waveform& path) {
    Monodromy m;
    m.Phi_T = integrate_phi(collect_gc(sys, path));
    m.Psi_T = period_derivative(path);
    return m;
}

} // namespace pss
