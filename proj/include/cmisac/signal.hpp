// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "cmisac/types.hpp"

namespace cmisac {

/// Rectangular pulse of width T convolved with a truncated ideal-lowpass
/// kernel of cutoff B, sampled at sample_rate over truncation_span seconds
/// and unit-energy normalized. The pulse is centered in the returned buffer;
/// sample k corresponds to t = k/sample_rate - (truncation_span - T)/2, so
/// the nominal rectangle occupies [0, T].
std::vector<double> shape_pulse(double T, double B, double sample_rate,
                                double truncation_span);

/// Builds the baseband waveform s(t) = sum_l g(t - lT) exp(j 2 pi f_{c_l}
/// (t - lT) + j phi_l) with the centered tone map, truncated to [0, LT) and
/// normalized to unit mean power.
BasebandSignal synthesize(const WaveformParams& params,
                          const FrequencySequence& freq,
                          const PhaseSequence& phase);

/// Peak instantaneous power over mean power; 1 for constant-modulus signals.
double papr(const BasebandSignal& sig);

// Debug interchange: raw interleaved re,im float64 (binary) or one
// "re,im" row per sample (CSV).
void save_signal_bin(const BasebandSignal& sig, const std::string& path);
void save_signal_csv(const BasebandSignal& sig, const std::string& path);
std::vector<cplx> load_signal_bin(const std::string& path);

} // namespace cmisac
