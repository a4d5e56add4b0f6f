#include "pss/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace pss {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t m = v.size();
    return m % 2 == 1 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

} // namespace

Spectrum spectrum(const Waveform& pss, double f0, int harmonics) {
    const int m = pss.steps();
    if (harmonics > m / 2) throw SimError("spectrum: harmonics must not exceed steps/2");
    const int n = static_cast<int>(pss.samples.front().size());

    Spectrum spec;
    spec.f0 = f0;
    spec.labels = pss.labels;
    spec.coeff.resize(n, harmonics + 1);
    spec.magnitude.resize(n, harmonics + 1);
    spec.dbm.resize(n, harmonics + 1);
    spec.freqs.resize(static_cast<size_t>(harmonics) + 1);

    for (int k = 0; k <= harmonics; ++k) {
        spec.freqs[static_cast<size_t>(k)] = k * f0;
        Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(n);
        for (int j = 0; j < m; ++j) {
            const double ang = -kTwoPi * k * j / m;
            acc += pss.samples[static_cast<size_t>(j)] *
                   std::complex<double>(std::cos(ang), std::sin(ang));
        }
        acc /= static_cast<double>(m);
        // single-sided scaling; the Nyquist bin (m even, k = m/2) is not doubled
        if (k > 0 && !(m % 2 == 0 && k == m / 2)) acc *= 2.0;
        spec.coeff.col(k) = acc;
        for (int r = 0; r < n; ++r) {
            const double mag = std::abs(acc(r));
            spec.magnitude(r, k) = mag;
            spec.dbm(r, k) =
                10.0 * std::log10(mag * mag / (2.0 * kDbmRefOhms) / 1e-3);
        }
    }
    return spec;
}

Matrix inverse_spectrum(const Spectrum& spec, int samples) {
    const int n = static_cast<int>(spec.coeff.rows());
    const int H = static_cast<int>(spec.coeff.cols()) - 1;
    Matrix out(n, samples);
    for (int j = 0; j < samples; ++j) {
        Eigen::VectorXcd acc = spec.coeff.col(0);
        for (int k = 1; k <= H; ++k) {
            const double ang = kTwoPi * k * j / samples;
            acc += spec.coeff.col(k) * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out.col(j) = acc.real();
    }
    return out;
}

ConvergenceReport convergence_report(const std::vector<IterationRecord>& history,
                                     const PssResult& ref, double tstab) {
    if (history.empty()) throw SimError("convergence_report: empty history");
    const double f_ref = ref.f0;
    const auto& ref_wave = ref.pss_waveform;
    const int last = static_cast<int>(history.size()) - 1;

    ConvergenceReport rep;
    rep.k_stab = static_cast<int>(std::llround(tstab * f_ref));

    for (int l = 0; l <= last; ++l) {
        const auto& rec = history[static_cast<size_t>(l)];
        double d2 = 0.0;
        const size_t count = std::min(rec.waveform.samples.size(), ref_wave.samples.size());
        for (size_t k = 0; k < count; ++k)
            d2 += (rec.waveform.samples[k] - ref_wave.samples[k]).squaredNorm();
        // The final iterate IS the reference; report its residual level instead
        // of an identically-zero distance.
        double e = l == last ? rec.residual : std::sqrt(d2);
        rep.eps.push_back(e);
        rep.delta_f.push_back(std::abs(1.0 / rec.T0 - f_ref) / f_ref);
    }
    rep.delta_f_init = rep.delta_f.front();

    // Convergence-zone entry: start of the strictly decreasing tail.
    int l0 = last;
    while (l0 > 0 && rep.eps[static_cast<size_t>(l0 - 1)] > rep.eps[static_cast<size_t>(l0)])
        --l0;
    rep.l0 = l0;

    const int zone = last - l0 + 1;
    if (zone >= 4) {
        std::vector<double> orders;
        for (int j = l0 + 1; j < last; ++j) {
            const double e0 = rep.eps[static_cast<size_t>(j - 1)];
            const double e1 = rep.eps[static_cast<size_t>(j)];
            const double e2 = rep.eps[static_cast<size_t>(j + 1)];
            if (e0 <= 0 || e1 <= 0 || e2 <= 0 || e1 >= e0 || e2 >= e1) continue;
            orders.push_back(std::log(e2 / e1) / std::log(e1 / e0));
        }
        if (!orders.empty()) {
            rep.sigma_hat = median(orders);
            // Digits gained per iteration, geometric mean over the zone. The
            // ratio of the final pair alone overstates the rate whenever the
            // last step overshoots the stopping threshold.
            rep.muL_hat = std::log10(rep.eps[static_cast<size_t>(l0)] /
                                     rep.eps[static_cast<size_t>(last)]) /
                          static_cast<double>(last - l0);
            rep.order_estimate_available = true;
        }
    }
    return rep;
}

} // namespace pss
