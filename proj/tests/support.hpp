#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "pss/shooting.hpp"

namespace pss::test {

inline Circuit load_circuit(const std::string& name) {
    std::ifstream in(std::string(CIRCUITS_DIR) + "/" + name);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_netlist(buf.str());
}

/// Central finite-difference Jacobians of i and q at x; oracle for the
/// stamped G and C.
struct FdJacobians {
    Matrix G;
    Matrix C;
};

inline FdJacobians fd_jacobians(const MnaSystem& sys, const Vector& x, double t) {
    const int n = sys.n();
    FdJacobians fd{Matrix::Zero(n, n), Matrix::Zero(n, n)};
    for (int j = 0; j < n; ++j) {
        const double h = 1e-6 * (1.0 + std::abs(x(j)));
        Vector xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        MnaEvaluation evp = sys.evaluate(xp, t);
        MnaEvaluation evm = sys.evaluate(xm, t);
        fd.G.col(j) = (evp.i - evm.i) / (2.0 * h);
        fd.C.col(j) = (evp.q - evm.q) / (2.0 * h);
    }
    return fd;
}

/// Central finite-difference columns of the shooting map derivative; oracle
/// for integrate_phi.
inline Matrix fd_monodromy(const MnaSystem& sys, double t0, double T0, const Vector& x0,
                           int steps) {
    TransientIntegrator integ(sys);
    const int n = sys.n();
    Matrix phi(n, n);
    for (int j = 0; j < n; ++j) {
        const double h = 1e-6 * (1.0 + std::abs(x0(j)));
        Vector xp = x0, xm = x0;
        xp(j) += h;
        xm(j) -= h;
        phi.col(j) = (integ.tran_pss(t0, T0, xp, steps).endpoint() -
                      integ.tran_pss(t0, T0, xm, steps).endpoint()) /
                     (2.0 * h);
    }
    return phi;
}

} // namespace pss::test
