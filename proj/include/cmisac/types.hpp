// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmisac {

using cplx = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

enum class Shaping {
    IdealRect,       // exact rectangular subpulse, constant modulus
    BandlimitedRect, // rectangle convolved with a truncated ideal-lowpass kernel
};

/// Waveform parameterization shared by every scheme: L subpulses of width T,
/// M candidate tones spaced delta_f apart, sampled at oversampling samples
/// per 1/(M*delta_f) interval.
struct WaveformParams {
    int L = 16;
    double T = 1.0;
    double delta_f = 1.0;
    int M = 16;
    int oversampling = 2;
    Shaping shaping = Shaping::IdealRect;
    double limit_bandwidth = 0.0; // bandlimited-rect cutoff; 0 -> 1/T
    double pulse_span = 8.0;      // bandlimited pulse truncation span, units of T

    double sample_rate() const { return oversampling * M * delta_f; }
    int samples_per_subpulse() const {
        return static_cast<int>(std::lround(T * sample_rate()));
    }
    int total_samples() const { return L * samples_per_subpulse(); }
    double duration() const { return L * T; }
    double bandwidth() const { return M * delta_f; }
    /// Tone m sits at (m - (M-1)/2) * delta_f so the band is centered on DC.
    double tone_frequency(int m) const {
        return (m - 0.5 * (M - 1)) * delta_f;
    }
    bool orthogonal_spacing() const {
        return std::abs(delta_f * T - 1.0) < 1e-12;
    }
    double limiting_bandwidth() const {
        return limit_bandwidth > 0.0 ? limit_bandwidth : 1.0 / T;
    }

    void validate() const {
        if (L < 1) throw std::invalid_argument("WaveformParams: L must be >= 1");
        if (M < 1) throw std::invalid_argument("WaveformParams: M must be >= 1");
        if (T <= 0.0) throw std::invalid_argument("WaveformParams: T must be > 0");
        if (delta_f <= 0.0) throw std::invalid_argument("WaveformParams: delta_f must be > 0");
        if (oversampling < 2)
            throw std::invalid_argument("WaveformParams: oversampling must be >= 2 (tone-grid Nyquist)");
        if (samples_per_subpulse() < 1)
            throw std::invalid_argument("WaveformParams: empty subpulse");
    }
};

/// Per-subpulse tone indices in [0, M). Repeats are legal (FSK); schemes that
/// need a permutation check for it themselves.
struct FrequencySequence {
    std::vector<int> indices;

    int size() const { return static_cast<int>(indices.size()); }
    bool operator==(const FrequencySequence&) const = default;
    bool is_permutation() const;
};

/// Per-subpulse initial phases, radians.
struct PhaseSequence {
    std::vector<double> phases;

    int size() const { return static_cast<int>(phases.size()); }
    static PhaseSequence zeros(int L) { return PhaseSequence{std::vector<double>(L, 0.0)}; }
};

/// Complex baseband sample buffer plus the parameters that produced it.
struct BasebandSignal {
    std::vector<cplx> samples;
    double sample_rate = 0.0;
    WaveformParams params;

    int size() const { return static_cast<int>(samples.size()); }
    double duration() const { return samples.size() / sample_rate; }
};

inline bool FrequencySequence::is_permutation() const {
    std::vector<char> seen(indices.size(), 0);
    for (int v : indices) {
        if (v < 0 || v >= size() || seen[v]) return false;
        seen[v] = 1;
    }
    return true;
}

} // namespace cmisac
