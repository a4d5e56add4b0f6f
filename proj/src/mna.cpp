#include "pss/mna.hpp"

#include <cmath>
#include <vector>

namespace pss {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Berkeley-style junction voltage limiting.
double pnjlim(double vnew, double vold, double vt, double vcrit) {
    if (vnew > vcrit && std::fabs(vnew - vold) > 2.0 * vt) {
        if (vold > 0.0) {
            double arg = 1.0 + (vnew - vold) / vt;
            vnew = arg > 0.0 ? vold + vt * std::log(arg) : vcrit;
        } else {
            vnew = vt * std::log(vnew / vt);
        }
    }
    return vnew;
}

double sin_source(const Device& d, double t) {
    return d.params.at("VO") +
           d.params.at("VA") * std::sin(kTwoPi * d.params.at("FREQ") * (t - d.params.at("TD")));
}

} // namespace

MnaSystem::MnaSystem(Circuit circuit)
    : circuit_(std::move(circuit)), map_(node_index_map(circuit_)) {}

MnaEvaluation MnaSystem::evaluate(const Vector& x, double t) const {
    if (x.size() != n()) throw SimError("state vector length mismatch");
    if (!x.allFinite()) throw SimError("state vector has non-finite entries");

    MnaEvaluation ev;
    ev.q = Vector::Zero(n());
    ev.i = Vector::Zero(n());
    ev.s = Vector::Zero(n());
    ev.G = Matrix::Zero(n(), n());
    ev.C = Matrix::Zero(n(), n());

    auto row = [&](const std::string& node) -> int {
        return node == "0" ? -1 : map_.node_row(node);
    };
    auto volt = [&](int r) { return r < 0 ? 0.0 : x(r); };
    auto add = [&](Vector& vec, int r, double val) {
        if (r >= 0) vec(r) += val;
    };
    auto add_i = [&](int r, double val) {
        if (r >= 0)
            ev.i(r) += val;
        else
            ev.ground_current += val;
    };
    auto add_s = [&](int r, double val) {
        if (r >= 0)
            ev.s(r) += val;
        else
            ev.ground_current += val;
    };
    auto add_G = [&](int r, int c, double val) {
        if (r >= 0 && c >= 0) ev.G(r, c) += val;
    };
    auto add_C = [&](int r, int c, double val) {
        if (r >= 0 && c >= 0) ev.C(r, c) += val;
    };

    for (const auto& d : circuit_.devices) {
        int a = row(d.terminals[0]);
        int b = row(d.terminals[1]);
        double v = volt(a) - volt(b);
        switch (d.kind) {
            case DeviceKind::Resistor: {
                double g = 1.0 / d.params.at("R");
                add_i(a, g * v);
                add_i(b, -g * v);
                add_G(a, a, g);
                add_G(a, b, -g);
                add_G(b, a, -g);
                add_G(b, b, g);
                break;
            }
            case DeviceKind::Capacitor: {
                double c = d.params.at("C");
                add(ev.q, a, c * v);
                add(ev.q, b, -c * v);
                add_C(a, a, c);
                add_C(a, b, -c);
                add_C(b, a, -c);
                add_C(b, b, c);
                break;
            }
            case DeviceKind::Inductor: {
                int br = map_.branch_rows.at(d.name);
                double il = x(br);
                add_i(a, il);
                add_i(b, -il);
                add_G(a, br, 1.0);
                add_G(b, br, -1.0);
                // branch: -L di/dt + (va - vb) = 0
                ev.q(br) += -d.params.at("L") * il;
                ev.C(br, br) += -d.params.at("L");
                ev.i(br) += v;
                add_G(br, a, 1.0);
                add_G(br, b, -1.0);
                break;
            }
            case DeviceKind::VSourceDC:
            case DeviceKind::VSourceSin: {
                int br = map_.branch_rows.at(d.name);
                double ib = x(br);
                add_i(a, ib);
                add_i(b, -ib);
                add_G(a, br, 1.0);
                add_G(b, br, -1.0);
                // branch: va - vb - V(t) = 0
                ev.i(br) += v;
                add_G(br, a, 1.0);
                add_G(br, b, -1.0);
                double val = d.kind == DeviceKind::VSourceDC ? d.params.at("DC")
                                                            : sin_source(d, t);
                ev.s(br) += -val;
                break;
            }
            case DeviceKind::ISourceDC: {
                // current flows from terminal a through the source into b
                double val = d.params.at("DC");
                add_s(a, val);
                add_s(b, -val);
                break;
            }
            case DeviceKind::PolyConductance: {
                double a0 = d.params.at("A0"), a1 = d.params.at("A1");
                double a2 = d.params.at("A2"), a3 = d.params.at("A3");
                double cur = a0 + v * (a1 + v * (a2 + v * a3));
                double g = a1 + v * (2.0 * a2 + v * 3.0 * a3);
                add_i(a, cur);
                add_i(b, -cur);
                add_G(a, a, g);
                add_G(a, b, -g);
                add_G(b, a, -g);
                add_G(b, b, g);
                break;
            }
            case DeviceKind::Diode: {
                double is = d.params.at("IS");
                double nvt = d.params.at("N") * kDiodeVt;
                double arg = v / nvt;
                if (arg > 700.0)
                    throw ModelEvalError(d.name + ": exponential overflow at V=" +
                                         std::to_string(v));
                double e = std::exp(arg);
                double cur = is * (e - 1.0);
                double g = is / nvt * e;
                add_i(a, cur);
                add_i(b, -cur);
                add_G(a, a, g);
                add_G(a, b, -g);
                add_G(b, a, -g);
                add_G(b, b, g);
                break;
            }
        }
    }
    return ev;
}

Vector MnaSystem::limit_step(const Vector& x_new, const Vector& x_old) const {
    Vector out = x_new;
    for (const auto& d : circuit_.devices) {
        if (d.kind != DeviceKind::Diode) continue;
        double nvt = d.params.at("N") * kDiodeVt;
        double is = d.params.at("IS");
        double vcrit = nvt * std::log(nvt / (std::sqrt(2.0) * is));
        int a = d.terminals[0] == "0" ? -1 : map_.node_row(d.terminals[0]);
        int b = d.terminals[1] == "0" ? -1 : map_.node_row(d.terminals[1]);
        auto volt = [](const Vector& x, int r) { return r < 0 ? 0.0 : x(r); };
        double vold = volt(x_old, a) - volt(x_old, b);
        double vnew = volt(out, a) - volt(out, b);
        double vlim = pnjlim(vnew, vold, nvt, vcrit);
        if (vlim != vnew) {
            if (a >= 0)
                out(a) += vlim - vnew;
            else
                out(b) -= vlim - vnew;
        }
    }
    return out;
}

bool MnaSystem::has_algebraic_rows() const {
    std::vector<bool> reactive(static_cast<size_t>(n()), false);
    auto mark = [&](const std::string& node) {
        if (node != "0") reactive[static_cast<size_t>(map_.node_row(node))] = true;
    };
    for (const auto& d : circuit_.devices) {
        if (d.kind == DeviceKind::Capacitor) {
            mark(d.terminals[0]);
            mark(d.terminals[1]);
        } else if (d.kind == DeviceKind::Inductor) {
            reactive[static_cast<size_t>(map_.branch_rows.at(d.name))] = true;
        }
    }
    for (bool r : reactive)
        if (!r) return true;
    return false;
}

Vector MnaSystem::solve_dc_newton(Vector x, double gmin, double source_scale,
                                  int max_iter, bool& ok) const {
    ok = false;
    const double s_norm = evaluate(Vector::Zero(n()), 0.0).s.lpNorm<Eigen::Infinity>();
    const double tol = 1e-12 * (1.0 + source_scale * s_norm);

    auto residual = [&](const Vector& xi, const MnaEvaluation& ev) {
        Vector f = ev.i + source_scale * ev.s;
        for (const auto& [node, r] : map_.node_rows) {
            (void)node;
            f(r) += gmin * xi(r);
        }
        return f;
    };

    for (int iter = 0; iter < max_iter; ++iter) {
        MnaEvaluation ev = evaluate(x, 0.0);
        Vector f = residual(x, ev);
        double fn = f.lpNorm<Eigen::Infinity>();
        if (fn <= tol) {
            ok = true;
            return x;
        }
        Matrix J = ev.G;
        for (const auto& [node, r] : map_.node_rows) {
            (void)node;
            J(r, r) += gmin;
        }
        Eigen::FullPivLU<Matrix> lu(J);
        if (!lu.isInvertible())
            throw SingularMatrixError("singular MNA system in DC solve");
        Vector dx = lu.solve(-f);
        // Damped update with junction limiting.
        double damp = 1.0;
        Vector x_next;
        for (int k = 0; k < 30; ++k) {
            x_next = limit_step(x + damp * dx, x);
            try {
                MnaEvaluation ev2 = evaluate(x_next, 0.0);
                if (residual(x_next, ev2).lpNorm<Eigen::Infinity>() <= fn || k == 29) break;
            } catch (const ModelEvalError&) {
                // fall through to smaller step
            }
            damp *= 0.5;
        }
        x = x_next;
    }
    return x;
}

Vector MnaSystem::solve_dc() const {
    bool ok = false;
    Vector x = solve_dc_newton(Vector::Zero(n()), 0.0, 1.0, 100, ok);
    if (ok) return x;

    // gmin stepping homotopy
    x = Vector::Zero(n());
    static const double gmins[] = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7,
                                   1e-8, 1e-9, 1e-10, 1e-11, 1e-12, 0.0};
    bool chain = true;
    for (double g : gmins) {
        x = solve_dc_newton(x, g, 1.0, 200, ok);
        if (!ok) {
            chain = false;
            break;
        }
    }
    if (chain && ok) return x;

    // source stepping homotopy
    x = Vector::Zero(n());
    for (int k = 1; k <= 20; ++k) {
        x = solve_dc_newton(x, 0.0, static_cast<double>(k) / 20.0, 200, ok);
        if (!ok) throw NoConvergenceError("DC solve failed (homotopy exhausted)");
    }
    return x;
}

} // namespace pss
