// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "cmisac/types.hpp"

namespace cmisac {

/// Delay-Doppler evaluation grid. Delays are snapped to integer sample lags;
/// both axes are symmetric about (and always contain) zero.
struct AfGridConfig {
    double delay_span = 0.0;   // seconds; grid covers [-span, span]
    double delay_step = 0.0;   // seconds; rounded to >= 1 sample
    double doppler_span = 0.0; // Hz;      grid covers [-span, span]
    double doppler_step = 0.0; // Hz

    /// Spec defaults: tau in [-LT, LT] step T/oversampling, nu in
    /// [-M df/2, M df/2] step df/oversampling.
    static AfGridConfig defaults(const WaveformParams& p) {
        AfGridConfig c;
        c.delay_span = p.duration();
        c.delay_step = p.T / p.oversampling;
        c.doppler_span = 0.5 * p.bandwidth();
        c.doppler_step = p.delta_f / p.oversampling;
        return c;
    }
};

/// Sampled |AF| surface, normalized so the origin equals 1. Row-major:
/// mags[d * delays.size() + t] for Doppler index d, delay index t.
struct AfGrid {
    std::vector<double> delays;   // seconds
    std::vector<double> dopplers; // Hz
    std::vector<double> mags;
    int origin_delay = 0;   // index of tau = 0
    int origin_doppler = 0; // index of nu = 0

    int n_delay() const { return static_cast<int>(delays.size()); }
    int n_doppler() const { return static_cast<int>(dopplers.size()); }
    double at(int doppler_idx, int delay_idx) const {
        return mags[static_cast<std::size_t>(doppler_idx) * delays.size() + delay_idx];
    }
};

/// Rectangle around the origin excluded from sidelobe search:
/// |tau| <= tau_max AND |nu| <= nu_max.
struct MainlobeRegion {
    double tau_max = 0.0;
    double nu_max = 0.0;

    static MainlobeRegion defaults(const WaveformParams& p) {
        return {p.T, 1.0 / p.duration()};
    }
    bool contains(double tau, double nu) const {
        return std::abs(tau) <= tau_max + 1e-12 && std::abs(nu) <= nu_max + 1e-12;
    }
};

struct PslReport {
    double psl = 0.0;    // ratio in (0, 1]
    double psl_db = 0.0; // 20 log10(psl)
    double tau = 0.0;    // location of the peak sidelobe
    double nu = 0.0;
    MainlobeRegion mainlobe;
};

struct BandwidthReport {
    double beta_sq_T_sq = 0.0; // normalized squared RMS bandwidth
    double centroid = 0.0;     // Hz
};

/// Discrete ambiguity surface AF(tau, nu) = sum_n s[n] s*[n-d] e^{j2pi nu
/// n/fs} / sum_n |s[n]|^2, evaluated by FFT cross-correlation per Doppler
/// bin. Doppler bins are independent and run under OpenMP; the result is
/// bit-identical for any thread count.
AfGrid ambiguity(const BasebandSignal& sig, const AfGridConfig& cfg);

/// Direct-sum reference evaluation of the same surface (no FFT, single
/// thread). Kept as the oracle for the fast kernel and for the kernel
/// benchmark; O(grid x N), so use small grids.
AfGrid ambiguity_serial(const BasebandSignal& sig, const AfGridConfig& cfg);

/// Peak sidelobe outside the mainlobe region, with its location. Determinism:
/// first strictly-greater grid point in row-major order wins ties.
PslReport psl(const AfGrid& af, const MainlobeRegion& mainlobe);

/// Normalized squared RMS bandwidth beta^2 T^2 from the slot-averaged power
/// spectrum: the periodogram of each of the L subpulse slots (zero-padded to
/// >= 4x the full signal) is accumulated and the centered second moment of
/// the result is taken. Averaging over slots makes the estimate a function
/// of the tone multiset and pulse shape only, which is what gives the
/// stepped-frequency schemes their data-independent bandwidth.
BandwidthReport rms_bandwidth(const BasebandSignal& sig);

/// Overall time duration L*T (Doppler resolution driver).
double duration(const BasebandSignal& sig);

void save_af_csv(const AfGrid& af, const std::string& path);
void save_af_bin(const AfGrid& af, const std::string& path);

} // namespace cmisac
