// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "cmisac/modulation.hpp"
#include "cmisac/types.hpp"

namespace cmisac {

/// Sufficient statistics for every detector: y[l][m] is the correlation of
/// subpulse l of the received signal against the unit-energy tone-m
/// reference, phase-aligned to the subpulse start.
struct FilterBankOutput {
    int L = 0;
    int M = 0;
    std::vector<cplx> y; // row-major L x M

    cplx at(int l, int m) const { return y[static_cast<std::size_t>(l) * M + m]; }
};

struct ChannelConfig {
    double snr_db = 10.0;      // per-subpulse SNR
    bool noiseless = false;    // snr -> +inf flag
    double gain_phase = 0.0;   // known unit-magnitude complex gain angle
    std::uint64_t seed = 1;

    cplx gain() const { return cplx(std::cos(gain_phase), std::sin(gain_phase)); }
};

struct DetectionResult {
    FrequencySequence freq_hat;
    std::vector<int> psk_hat; // per-subpulse PSK indices (empty if N/A)
    DataBits bits_hat;        // empty when the decision is out of alphabet
    double score = 0.0;       // detector objective value
};

FilterBankOutput matched_filter_bank(const BasebandSignal& rx, const WaveformParams& params);

/// Adds circularly-symmetric complex Gaussian noise at the configured SNR
/// (signal mean power is 1 by synthesis contract). Deterministic per seed.
BasebandSignal awgn(const BasebandSignal& sig, const ChannelConfig& cfg);

/// Optimal linear-assignment solver (Jonker-Volgenant style shortest
/// augmenting paths, O(n^3)). Returns the row-to-column assignment that
/// maximizes (or minimizes) the total score. Deterministic; an all-equal
/// matrix yields the identity assignment.
std::vector<int> hungarian(const std::vector<double>& score, int n, bool maximize);

/// Hungarian detector over score[l][m] = |y[l][m]| (non-coherent, default)
/// or Re{g* y[l][m]} (coherent). Requires M = L.
DetectionResult detect_permutation(const FilterBankOutput& yb, const SchemeParams& p,
                                   bool coherent = false, cplx gain = cplx(1, 0));

/// Joint permutation + per-cell PSK: cell score max_k Re{e^{-j theta_k} g*
/// y[l][m]}, Hungarian over cells, then per-cell argmax recovers the PSK
/// index. Coherent. Requires M = L.
DetectionResult detect_perm_psk(const FilterBankOutput& yb, const SchemeParams& p,
                                cplx gain = cplx(1, 0));

/// Per-subpulse argmax_m |y[l][m]|; lowest index wins ties. Also serves
/// FSK_PSLMIN as the non-coherent suboptimal detector.
DetectionResult detect_fsk(const FilterBankOutput& yb, const SchemeParams& p);

/// Per-subpulse joint argmax over (m, k) of Re{e^{-j theta_k} g* y[l][m]}.
DetectionResult detect_fsk_psk(const FilterBankOutput& yb, const SchemeParams& p,
                               cplx gain = cplx(1, 0));

/// Exhaustive ML oracle over the scheme's alphabet (guarded to <= 1e7
/// hypotheses). Uses the same per-scheme statistic as the structured
/// detectors.
DetectionResult brute_force_ml(const FilterBankOutput& yb, Scheme scheme,
                               const SchemeParams& p, cplx gain = cplx(1, 0));

/// Documented per-subpulse complexity model (x-axis of the complexity
/// figures): PSK slicing -> order; PERM -> L^2; PERM_QPSK -> L^2 + M*order;
/// FSK(+PSLMIN) -> M; FSK_QPSK -> M*order.
double complexity_per_subpulse(Scheme scheme, int L, int M, int psk_order);

/// Runs the scheme's structured detector and fills bits_hat via the
/// modulation inverse map when the decision is in-alphabet.
DetectionResult detect(Scheme scheme, const FilterBankOutput& yb, const SchemeParams& p,
                       cplx gain = cplx(1, 0));

void save_filter_bank_csv(const FilterBankOutput& yb, const std::string& path);

} // namespace cmisac
