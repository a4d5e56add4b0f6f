#pragma once

#include <complex>
#include <vector>

#include "pss/shooting.hpp"

namespace pss {

/// Harmonic content of a one-period PSS waveform. Row r of the matrices is
/// the MNA row r of the waveform, column k the kth harmonic (k*f0).
struct Spectrum {
    double f0 = 0.0;
    std::vector<double> freqs; // harmonics 0..H, freqs[k] = k*f0
    std::vector<std::string> labels;
    Eigen::MatrixXcd coeff;  // complex single-sided coefficients
    Matrix magnitude;        // |V_k| in volts (amperes on branch rows)
    Matrix dbm;              // 10*log10((|V_k|^2/(2*R_ref))/1mW), R_ref = 50 ohm
};

/// dBm reference resistance.
inline constexpr double kDbmRefOhms = 50.0;

Spectrum spectrum(const Waveform& pss, double f0, int harmonics);

/// Reconstruct the period samples from a spectrum (inverse transform of the
/// single-sided coefficients; used by the invertibility tests).
Matrix inverse_spectrum(const Spectrum& spec, int samples);

struct ConvergenceReport {
    std::vector<double> eps;     // eps(l), full-waveform distance to the reference
    std::vector<double> delta_f; // |f0(l) - f_ref| / f_ref
    double delta_f_init = 0.0;
    int k_stab = 0;  // round(Tstab / T_ref)
    int l0 = 0;      // entry index into the convergence zone
    double sigma_hat = 0.0;
    double muL_hat = 0.0;
    bool order_estimate_available = false;
};

ConvergenceReport convergence_report(const std::vector<IterationRecord>& history,
                                     const PssResult& ref, double tstab);

} // namespace pss
