// SPDX-License-Identifier: Apache-2.0
#include "cmisac/signal.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace cmisac {

std::vector<double> shape_pulse(double T, double B, double sample_rate,
                                double truncation_span) {
    if (B <= 0.0) throw std::invalid_argument("shape_pulse: B must be > 0");
    if (truncation_span < T)
        throw std::invalid_argument("shape_pulse: span shorter than the pulse");
    const double dt = 1.0 / sample_rate;
    const int n_out = static_cast<int>(std::lround(truncation_span * sample_rate));
    const int n_rect = static_cast<int>(std::lround(T * sample_rate));

    // Symmetric lowpass kernel h(t) = 2B sinc(2Bt); odd length keeps the
    // convolution even about the pulse center.
    const int half_k = (n_out - n_rect) / 2 + n_rect;
    std::vector<double> kernel(2 * half_k + 1);
    for (int i = -half_k; i <= half_k; ++i) {
        double t = i * dt;
        double x = 2.0 * B * t;
        double v = (std::abs(x) < 1e-12) ? 1.0 : std::sin(kPi * x) / (kPi * x);
        kernel[i + half_k] = 2.0 * B * v * dt;
    }

    // g[k] at t_k = k dt - (span - T)/2; rect spans sample centers
    // [0, n_rect) shifted to the buffer center.
    const int off = (n_out - n_rect) / 2;
    std::vector<double> g(n_out, 0.0);
    for (int k = 0; k < n_out; ++k) {
        double acc = 0.0;
        for (int m = 0; m < n_rect; ++m) {
            int idx = (k - off) - m + half_k;
            if (idx >= 0 && idx < static_cast<int>(kernel.size())) acc += kernel[idx];
        }
        g[k] = acc;
    }

    double energy = 0.0;
    for (double v : g) energy += v * v;
    energy *= dt;
    if (energy <= 0.0) throw std::runtime_error("shape_pulse: degenerate pulse");
    const double scale = 1.0 / std::sqrt(energy);
    for (double& v : g) v *= scale;
    return g;
}

BasebandSignal synthesize(const WaveformParams& params,
                          const FrequencySequence& freq,
                          const PhaseSequence& phase) {
    params.validate();
    if (freq.size() != params.L || phase.size() != params.L)
        throw std::invalid_argument("synthesize: sequence length != L");
    for (int c : freq.indices)
        if (c < 0 || c >= params.M)
            throw std::invalid_argument("synthesize: tone index out of range");

    const double fs = params.sample_rate();
    const int W = params.samples_per_subpulse();
    const int N = params.total_samples();
    BasebandSignal sig;
    sig.sample_rate = fs;
    sig.params = params;
    sig.samples.assign(N, cplx(0.0, 0.0));

    if (params.shaping == Shaping::IdealRect) {
        for (int l = 0; l < params.L; ++l) {
            const double f = params.tone_frequency(freq.indices[l]);
            const double ph0 = phase.phases[l];
            for (int k = 0; k < W; ++k) {
                double a = kTwoPi * f * k / fs + ph0;
                sig.samples[l * W + k] = cplx(std::cos(a), std::sin(a));
            }
        }
        return sig; // unit modulus by construction -> mean power already 1
    }

    const double span = params.pulse_span * params.T;
    const auto g = shape_pulse(params.T, params.limiting_bandwidth(), fs, span);
    const int off = (static_cast<int>(g.size()) - W) / 2;
    for (int l = 0; l < params.L; ++l) {
        const double f = params.tone_frequency(freq.indices[l]);
        const double ph0 = phase.phases[l];
        for (int k = 0; k < static_cast<int>(g.size()); ++k) {
            int n = l * W + k - off;
            if (n < 0 || n >= N) continue;
            double t_rel = (k - off) / fs; // t - lT
            double a = kTwoPi * f * t_rel + ph0;
            sig.samples[n] += g[k] * cplx(std::cos(a), std::sin(a));
        }
    }
    double p = 0.0;
    for (const cplx& s : sig.samples) p += std::norm(s);
    p /= N;
    if (p <= 0.0) throw std::runtime_error("synthesize: zero-power signal");
    const double scale = 1.0 / std::sqrt(p);
    for (cplx& s : sig.samples) s *= scale;
    return sig;
}

double papr(const BasebandSignal& sig) {
    if (sig.samples.empty()) throw std::invalid_argument("papr: empty signal");
    double peak = 0.0, mean = 0.0;
    for (const cplx& s : sig.samples) {
        double p = std::norm(s);
        if (p > peak) peak = p;
        mean += p;
    }
    mean /= sig.samples.size();
    if (mean <= 0.0) throw std::invalid_argument("papr: zero-energy signal");
    return peak / mean;
}

void save_signal_bin(const BasebandSignal& sig, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    for (const cplx& s : sig.samples) {
        double re = s.real(), im = s.imag();
        out.write(reinterpret_cast<const char*>(&re), sizeof(double));
        out.write(reinterpret_cast<const char*>(&im), sizeof(double));
    }
}

void save_signal_csv(const BasebandSignal& sig, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "re,im\n";
    char buf[64];
    for (const cplx& s : sig.samples) {
        auto r = std::to_chars(buf, buf + sizeof(buf), s.real());
        out.write(buf, r.ptr - buf);
        out.put(',');
        r = std::to_chars(buf, buf + sizeof(buf), s.imag());
        out.write(buf, r.ptr - buf);
        out.put('\n');
    }
}

std::vector<cplx> load_signal_bin(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<cplx> out;
    double re, im;
    while (in.read(reinterpret_cast<char*>(&re), sizeof(double)) &&
           in.read(reinterpret_cast<char*>(&im), sizeof(double)))
        out.emplace_back(re, im);
    return out;
}

} // namespace cmisac
