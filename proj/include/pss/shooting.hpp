#pragma once

#include <string>
#include <vector>

#include "pss/sensitivity.hpp"

namespace pss {

/// Solver parameters (the analysis-card validation bounds apply).
struct ShootingOptions {
    double tper = 0.0;
    double tstab = 0.0;
    int max_itr = 10;
    double eps_max = 1e-12;
    int steps = 256;
    std::string phase_node; // autonomous only; empty = first non-ground node

    static ShootingOptions from_card(const AnalysisCard& card);
};

/// One Newton iterate of the shooting loop.
struct IterationRecord {
    int l = 0;
    double residual = 0.0;
    double T0 = 0.0;
    Vector x0;
    Waveform waveform; // one-period path from x0
};

struct PssResult {
    Waveform pss_waveform;
    double f0 = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<IterationRecord> history;
    Monodromy monodromy;
    Vector x_dc;
    Waveform stab_waveform; // autonomous runs only
};

/// Shooting loop exceeded MaxItr; carries the partial result so datasets can
/// still be written.
struct MaxIterationsError : SimError {
    explicit MaxIterationsError(PssResult partial)
        : SimError("shooting Newton exceeded MaxItr"), partial(std::move(partial)) {}
    PssResult partial;
};

/// Phase anchoring residual alpha^T (x0 - x_ref) and its gradient row alpha
/// (unit vector on the phase node's voltage row; the T0 column entry is 0).
struct PhaseCondition {
    double residual = 0.0;
    Eigen::RowVectorXd alpha;
};

PhaseCondition phase_condition(const MnaIndexMap& map, const std::string& alpha_node,
                               const Vector& x0, const Vector& x_ref);

/// Fixed-period shooting Newton for driven circuits.
PssResult shoot_driven(const MnaSystem& sys, double T0, const Vector& x_guess,
                       const ShootingOptions& opts);

/// Augmented unknown-period shooting for autonomous circuits:
/// DC solve -> stabilization transient -> Newton on the bordered
/// (n+1)-dimensional system.
PssResult shoot_autonomous(const MnaSystem& sys, const ShootingOptions& opts);

} // namespace pss
