// SPDX-License-Identifier: Apache-2.0
#include "cmisac/detectors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "cmisac/rng.hpp"

namespace cmisac {

FilterBankOutput matched_filter_bank(const BasebandSignal& rx, const WaveformParams& params) {
    params.validate();
    const int W = params.samples_per_subpulse();
    const int N = params.total_samples();
    if (rx.size() != N)
        throw std::invalid_argument("matched_filter_bank: rx duration != L*T");
    const double fs = params.sample_rate();
    FilterBankOutput out;
    out.L = params.L;
    out.M = params.M;
    out.y.assign(static_cast<std::size_t>(params.L) * params.M, cplx(0, 0));
    const double inv_sqrt_w = 1.0 / std::sqrt(static_cast<double>(W));
    // conj(reference) per tone, shared across subpulses
    std::vector<cplx> ref(static_cast<std::size_t>(params.M) * W);
    for (int m = 0; m < params.M; ++m) {
        const double f = params.tone_frequency(m);
        for (int k = 0; k < W; ++k) {
            double a = kTwoPi * f * k / fs;
            ref[static_cast<std::size_t>(m) * W + k] = cplx(std::cos(a), -std::sin(a));
        }
    }
    for (int l = 0; l < params.L; ++l) {
        const cplx* seg = rx.samples.data() + static_cast<std::size_t>(l) * W;
        for (int m = 0; m < params.M; ++m) {
            const cplx* r = ref.data() + static_cast<std::size_t>(m) * W;
            cplx acc(0, 0);
            for (int k = 0; k < W; ++k) acc += seg[k] * r[k];
            out.y[static_cast<std::size_t>(l) * params.M + m] = acc * inv_sqrt_w;
        }
    }
    return out;
}

BasebandSignal awgn(const BasebandSignal& sig, const ChannelConfig& cfg) {
    BasebandSignal out = sig;
    const cplx g = cfg.gain();
    for (cplx& s : out.samples) s *= g;
    if (cfg.noiseless) return out;
    if (!std::isfinite(cfg.snr_db)) throw std::invalid_argument("awgn: non-finite SNR");
    const double noise_power = std::pow(10.0, -cfg.snr_db / 10.0); // signal power = 1
    const double scale = std::sqrt(noise_power);
    Rng rng(cfg.seed);
    for (cplx& s : out.samples) s += scale * rng.next_cgauss();
    return out;
}

std::vector<int> hungarian(const std::vector<double>& score, int n, bool maximize) {
    if (n < 1 || static_cast<int>(score.size()) != n * n)
        throw std::invalid_argument("hungarian: matrix must be square");
    for (double v : score)
        if (!std::isfinite(v)) throw std::invalid_argument("hungarian: non-finite entry");

    // Shortest-augmenting-path assignment on the cost matrix (minimizing);
    // 1-based arrays, column 0 is the virtual root.
    const double sign = maximize ? -1.0 : 1.0;
    auto cost = [&](int i, int j) { return sign * score[static_cast<std::size_t>(i) * n + j]; };
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> assignment(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j]) assignment[p[j] - 1] = j - 1;
    return assignment;
}

namespace {

double assignment_score(const std::vector<double>& score, int n, const std::vector<int>& a) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += score[static_cast<std::size_t>(i) * n + a[i]];
    return s;
}

// e^{-j theta_k} for each constellation point, hoisted out of the scan loops
std::vector<cplx> psk_rotations(int order) {
    std::vector<cplx> rot(order);
    for (int k = 0; k < order; ++k) {
        double th = psk_phase(k, order);
        rot[k] = cplx(std::cos(th), -std::sin(th));
    }
    return rot;
}

void fill_bits(DetectionResult& r, Scheme scheme, const SchemeParams& p) {
    try {
        r.bits_hat = symbols_to_bits(scheme, r.freq_hat, r.psk_hat, p);
    } catch (const std::invalid_argument&) {
        r.bits_hat.clear(); // out-of-alphabet decision (e.g. permutation rank overflow)
    }
}

} // namespace

DetectionResult detect_permutation(const FilterBankOutput& yb, const SchemeParams& p,
                                   bool coherent, cplx gain) {
    if (yb.M != yb.L) throw std::invalid_argument("detect_permutation: requires M = L");
    const int n = yb.L;
    std::vector<double> score(static_cast<std::size_t>(n) * n);
    const cplx gc = std::conj(gain);
    for (int l = 0; l < n; ++l)
        for (int m = 0; m < n; ++m)
            score[static_cast<std::size_t>(l) * n + m] =
                coherent ? (gc * yb.at(l, m)).real() : std::sqrt(std::norm(yb.at(l, m)));
    DetectionResult r;
    r.freq_hat.indices = hungarian(score, n, /*maximize=*/true);
    r.score = assignment_score(score, n, r.freq_hat.indices);
    fill_bits(r, Scheme::Perm, p);
    return r;
}

DetectionResult detect_perm_psk(const FilterBankOutput& yb, const SchemeParams& p,
                                cplx gain) {
    if (yb.M != yb.L) throw std::invalid_argument("detect_perm_psk: requires M = L");
    const int n = yb.L;
    const int order = p.psk_order;
    std::vector<double> score(static_cast<std::size_t>(n) * n);
    std::vector<int> best_k(static_cast<std::size_t>(n) * n);
    const cplx gc = std::conj(gain);
    const auto rot = psk_rotations(order);
    for (int l = 0; l < n; ++l)
        for (int m = 0; m < n; ++m) {
            const cplx z = gc * yb.at(l, m);
            double best = -std::numeric_limits<double>::infinity();
            int kb = 0;
            for (int k = 0; k < order; ++k) {
                double val = (z * rot[k]).real();
                if (val > best) {
                    best = val;
                    kb = k;
                }
            }
            score[static_cast<std::size_t>(l) * n + m] = best;
            best_k[static_cast<std::size_t>(l) * n + m] = kb;
        }
    DetectionResult r;
    r.freq_hat.indices = hungarian(score, n, /*maximize=*/true);
    r.score = assignment_score(score, n, r.freq_hat.indices);
    r.psk_hat.resize(n);
    for (int l = 0; l < n; ++l)
        r.psk_hat[l] = best_k[static_cast<std::size_t>(l) * n + r.freq_hat.indices[l]];
    fill_bits(r, Scheme::PermQpsk, p);
    return r;
}

DetectionResult detect_fsk(const FilterBankOutput& yb, const SchemeParams& p) {
    DetectionResult r;
    r.freq_hat.indices.resize(yb.L);
    double total = 0.0;
    // argmax over |y|^2 decides identically to |y| and skips the sqrt
    for (int l = 0; l < yb.L; ++l) {
        int best = 0;
        double bv = std::norm(yb.at(l, 0));
        for (int m = 1; m < yb.M; ++m) {
            double v = std::norm(yb.at(l, m));
            if (v > bv) {
                bv = v;
                best = m;
            }
        }
        r.freq_hat.indices[l] = best;
        total += bv;
    }
    r.score = total;
    fill_bits(r, Scheme::Fsk, p);
    return r;
}

DetectionResult detect_fsk_psk(const FilterBankOutput& yb, const SchemeParams& p,
                               cplx gain) {
    const int order = p.psk_order;
    const cplx gc = std::conj(gain);
    const auto rot = psk_rotations(order);
    DetectionResult r;
    r.freq_hat.indices.resize(yb.L);
    r.psk_hat.resize(yb.L);
    double total = 0.0;
    for (int l = 0; l < yb.L; ++l) {
        double best = -std::numeric_limits<double>::infinity();
        int bm = 0, bk = 0;
        for (int m = 0; m < yb.M; ++m) {
            const cplx z = gc * yb.at(l, m);
            for (int k = 0; k < order; ++k) {
                double val = (z * rot[k]).real();
                if (val > best) {
                    best = val;
                    bm = m;
                    bk = k;
                }
            }
        }
        r.freq_hat.indices[l] = bm;
        r.psk_hat[l] = bk;
        total += best;
    }
    r.score = total;
    fill_bits(r, Scheme::FskQpsk, p);
    return r;
}

namespace {

// Enumerates permutations / tone tuples and maximizes the same statistic the
// structured detectors use. Verification oracle only.
DetectionResult brute_force_perm(const FilterBankOutput& yb, const SchemeParams& p,
                                 bool with_psk, cplx gain) {
    const int n = yb.L;
    double guard = 1.0;
    for (int i = 2; i <= n; ++i) guard *= i;
    if (with_psk) guard *= std::pow(static_cast<double>(p.psk_order), n);
    if (guard > 1e7) throw std::invalid_argument("brute_force_ml: search space too large");

    const cplx gc = std::conj(gain);
    const auto rot = psk_rotations(p.psk_order);
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    DetectionResult best;
    best.score = -std::numeric_limits<double>::infinity();
    do {
        if (!with_psk) {
            double s = 0.0;
            for (int l = 0; l < n; ++l) s += std::sqrt(std::norm(yb.at(l, perm[l])));
            if (s > best.score) {
                best.score = s;
                best.freq_hat.indices = perm;
            }
        } else {
            double s = 0.0;
            std::vector<int> ks(n);
            for (int l = 0; l < n; ++l) {
                const cplx z = gc * yb.at(l, perm[l]);
                double cb = -std::numeric_limits<double>::infinity();
                for (int k = 0; k < p.psk_order; ++k) {
                    double val = (z * rot[k]).real();
                    if (val > cb) {
                        cb = val;
                        ks[l] = k;
                    }
                }
                s += cb;
            }
            if (s > best.score) {
                best.score = s;
                best.freq_hat.indices = perm;
                best.psk_hat = ks;
            }
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    fill_bits(best, with_psk ? Scheme::PermQpsk : Scheme::Perm, p);
    return best;
}

DetectionResult brute_force_fsk(const FilterBankOutput& yb, const SchemeParams& p,
                                bool with_psk, cplx gain) {
    // The metric is separable, so the exhaustive max over the M^L (x order^L)
    // tuple space equals the per-row exhaustive max; the guard bounds what is
    // actually enumerated.
    double guard = static_cast<double>(yb.L) * yb.M * (with_psk ? p.psk_order : 1);
    if (guard > 1e7) throw std::invalid_argument("brute_force_ml: search space too large");
    const cplx gc = std::conj(gain);
    const auto rot = psk_rotations(p.psk_order);
    DetectionResult best;
    best.freq_hat.indices.resize(yb.L);
    if (with_psk) best.psk_hat.resize(yb.L);
    double total = 0.0;
    for (int l = 0; l < yb.L; ++l) {
        double rb = -std::numeric_limits<double>::infinity();
        for (int m = 0; m < yb.M; ++m) {
            if (!with_psk) {
                double val = std::norm(yb.at(l, m));
                if (val > rb) {
                    rb = val;
                    best.freq_hat.indices[l] = m;
                }
            } else {
                const cplx z = gc * yb.at(l, m);
                for (int k = 0; k < p.psk_order; ++k) {
                    double val = (z * rot[k]).real();
                    if (val > rb) {
                        rb = val;
                        best.freq_hat.indices[l] = m;
                        best.psk_hat[l] = k;
                    }
                }
            }
        }
        total += rb;
    }
    best.score = total;
    fill_bits(best, with_psk ? Scheme::FskQpsk : Scheme::Fsk, p);
    return best;
}

DetectionResult brute_force_psk_only(const FilterBankOutput& yb, Scheme scheme,
                                     const SchemeParams& p, cplx gain) {
    // Fixed frequency pattern: per-subpulse exhaustive PSK slicing on the
    // known tone.
    FrequencySequence pattern =
        scheme == Scheme::LsfQpsk ? lsf_sequence(p.L) : costas_sequence(p.L);
    const cplx gc = std::conj(gain);
    const auto rot = psk_rotations(p.psk_order);
    DetectionResult r;
    r.freq_hat = pattern;
    r.psk_hat.resize(p.L);
    double total = 0.0;
    for (int l = 0; l < p.L; ++l) {
        const cplx z = gc * yb.at(l, pattern.indices[l]);
        double cb = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < p.psk_order; ++k) {
            double val = (z * rot[k]).real();
            if (val > cb) {
                cb = val;
                r.psk_hat[l] = k;
            }
        }
        total += cb;
    }
    r.score = total;
    fill_bits(r, scheme, p);
    return r;
}

} // namespace

DetectionResult brute_force_ml(const FilterBankOutput& yb, Scheme scheme,
                               const SchemeParams& p, cplx gain) {
    switch (scheme) {
        case Scheme::Perm: return brute_force_perm(yb, p, false, gain);
        case Scheme::PermQpsk: return brute_force_perm(yb, p, true, gain);
        case Scheme::Fsk:
        case Scheme::FskPslMin: return brute_force_fsk(yb, p, false, gain);
        case Scheme::FskQpsk: return brute_force_fsk(yb, p, true, gain);
        case Scheme::LsfQpsk:
        case Scheme::CostasQpsk: return brute_force_psk_only(yb, scheme, p, gain);
    }
    throw std::invalid_argument("brute_force_ml: bad scheme");
}

double complexity_per_subpulse(Scheme scheme, int L, int M, int psk_order) {
    switch (scheme) {
        case Scheme::LsfQpsk:
        case Scheme::CostasQpsk: return psk_order;
        case Scheme::Perm: return static_cast<double>(L) * L;
        case Scheme::PermQpsk: return static_cast<double>(L) * L + static_cast<double>(M) * psk_order;
        case Scheme::Fsk:
        case Scheme::FskPslMin: return M;
        case Scheme::FskQpsk: return static_cast<double>(M) * psk_order;
    }
    throw std::invalid_argument("complexity_per_subpulse: bad scheme");
}

DetectionResult detect(Scheme scheme, const FilterBankOutput& yb, const SchemeParams& p,
                       cplx gain) {
    switch (scheme) {
        case Scheme::LsfQpsk:
        case Scheme::CostasQpsk:
            // PSK slicing on the fixed pattern is the structured detector too.
            return brute_force_psk_only(yb, scheme, p, gain);
        case Scheme::Perm: return detect_permutation(yb, p, false, gain);
        case Scheme::PermQpsk: return detect_perm_psk(yb, p, gain);
        case Scheme::Fsk: {
            DetectionResult r = detect_fsk(yb, p);
            return r;
        }
        case Scheme::FskPslMin: {
            DetectionResult r = detect_fsk(yb, p);
            fill_bits(r, Scheme::FskPslMin, p);
            return r;
        }
        case Scheme::FskQpsk: return detect_fsk_psk(yb, p, gain);
    }
    throw std::invalid_argument("detect: bad scheme");
}

void save_filter_bank_csv(const FilterBankOutput& yb, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "l,m,re,im\n";
    char buf[64];
    auto put = [&](double v, char sep) {
        auto r = std::to_chars(buf, buf + sizeof(buf), v);
        out.write(buf, r.ptr - buf);
        out.put(sep);
    };
    for (int l = 0; l < yb.L; ++l)
        for (int m = 0; m < yb.M; ++m) {
            out << l << ',' << m << ',';
            put(yb.at(l, m).real(), ',');
            put(yb.at(l, m).imag(), '\n');
        }
}

} // namespace cmisac
