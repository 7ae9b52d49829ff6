// SPDX-License-Identifier: Apache-2.0
// Unit tests for pulse shaping, synthesis and PAPR.

#include "cmisac/signal.hpp"

#include <numeric>

#include "cmisac/fft.hpp"
#include "cmisac/rng.hpp"
#include "test_util.hpp"

using namespace cmisac;

namespace {

WaveformParams make_params(int L, int M, int os = 4, Shaping sh = Shaping::IdealRect) {
    WaveformParams p;
    p.L = L;
    p.M = M;
    p.oversampling = os;
    p.shaping = sh;
    return p;
}

// direct DFT power spectrum; oracle path, no library FFT
std::vector<double> dft_power(const std::vector<cplx>& s, int nfft) {
    std::vector<double> power(nfft);
    for (int k = 0; k < nfft; ++k) {
        cplx acc(0, 0);
        for (std::size_t n = 0; n < s.size(); ++n) {
            double a = -kTwoPi * k * static_cast<double>(n) / nfft;
            acc += s[n] * cplx(std::cos(a), std::sin(a));
        }
        power[k] = std::norm(acc);
    }
    return power;
}

void test_synthesize_trivial() {
    // L=1, M=1, zero tone offset, zero phase -> all samples 1+0j
    auto p = make_params(1, 1);
    BasebandSignal sig = synthesize(p, FrequencySequence{{0}}, PhaseSequence::zeros(1));
    CHECK(sig.size() == p.total_samples());
    for (const cplx& s : sig.samples) {
        CHECK_NEAR(s.real(), 1.0, 1e-12);
        CHECK_NEAR(s.imag(), 0.0, 1e-12);
    }

    // phase flip: second subpulse = -(first subpulse)
    auto p2 = make_params(2, 1);
    BasebandSignal flip =
        synthesize(p2, FrequencySequence{{0, 0}}, PhaseSequence{{0.0, kPi}});
    const int W = p2.samples_per_subpulse();
    for (int k = 0; k < W; ++k) {
        CHECK_NEAR(std::abs(flip.samples[W + k] + flip.samples[k]), 0.0, 1e-12);
        CHECK_NEAR(std::abs(flip.samples[k]), 1.0, 1e-12);
    }
}

void test_synthesize_lsf_spectrum() {
    // L=64 linear pattern occupies ~64 df of band, centroid ~ 0
    auto p = make_params(64, 64, 2);
    FrequencySequence freq;
    freq.indices.resize(64);
    std::iota(freq.indices.begin(), freq.indices.end(), 0);
    BasebandSignal sig = synthesize(p, freq, PhaseSequence::zeros(64));

    const int nfft = Fft::next_pow2(2 * sig.size());
    Fft fft(nfft);
    std::vector<cplx> buf(nfft, cplx(0, 0));
    std::copy(sig.samples.begin(), sig.samples.end(), buf.begin());
    fft.forward(buf);
    double total = 0.0, inside = 0.0, narrow = 0.0, first = 0.0;
    for (int i = 0; i < nfft; ++i) {
        double f = (i <= nfft / 2) ? i * sig.sample_rate / nfft
                                   : (i - nfft) * sig.sample_rate / nfft;
        double pw = std::norm(buf[i]);
        total += pw;
        first += f * pw;
        if (std::abs(f) <= 33.0 * p.delta_f) inside += pw;
        if (std::abs(f) <= 20.0 * p.delta_f) narrow += pw;
    }
    CHECK(inside / total > 0.9);        // band ~ 64 df wide
    CHECK(narrow / total < 0.75);       // not concentrated in a fraction of it
    CHECK(std::abs(first / total) < 0.5 * p.delta_f); // centered tone map
}

void test_papr() {
    BasebandSignal ones;
    ones.samples.assign(64, cplx(1, 0));
    ones.sample_rate = 1.0;
    ones.params = make_params(1, 1);
    CHECK_NEAR(papr(ones), 1.0, 1e-15);

    // any ideal-rect synthesis has unit PAPR
    Rng rng(3);
    for (int rep = 0; rep < 20; ++rep) {
        auto p = make_params(16, 16);
        FrequencySequence freq;
        PhaseSequence ph;
        for (int l = 0; l < 16; ++l) {
            freq.indices.push_back(static_cast<int>(rng.next_below(16)));
            ph.phases.push_back(rng.next_double() * kTwoPi);
        }
        CHECK_NEAR(papr(synthesize(p, freq, ph)), 1.0, 1e-12);
    }

    // two equal-amplitude orthogonal tones over one common period: peak
    // |1+1|^2 = 4 vs mean power 2 -> PAPR 2 (dense-grid oracle)
    const int n = 4096;
    BasebandSignal two;
    two.sample_rate = n;
    two.params = make_params(1, 1);
    for (int i = 0; i < n; ++i) {
        double t = static_cast<double>(i) / n;
        two.samples.push_back(cplx(std::cos(kTwoPi * t), std::sin(kTwoPi * t)) +
                              cplx(std::cos(2 * kTwoPi * t), std::sin(2 * kTwoPi * t)));
    }
    CHECK_NEAR(papr(two), 2.0, 1e-3);

    BasebandSignal zero;
    zero.samples.assign(8, cplx(0, 0));
    zero.sample_rate = 1.0;
    CHECK_THROWS(papr(zero));
    BasebandSignal empty;
    CHECK_THROWS(papr(empty));
}

void test_phase_linearity_and_energy() {
    Rng rng(5);
    auto p = make_params(8, 8);
    FrequencySequence freq;
    PhaseSequence ph;
    for (int l = 0; l < 8; ++l) {
        freq.indices.push_back(static_cast<int>(rng.next_below(8)));
        ph.phases.push_back(rng.next_double() * kTwoPi);
    }
    const double c = 1.2345;
    PhaseSequence shifted = ph;
    for (double& v : shifted.phases) v += c;
    BasebandSignal a = synthesize(p, freq, ph);
    BasebandSignal b = synthesize(p, freq, shifted);
    const cplx rot(std::cos(c), std::sin(c));
    for (int i = 0; i < a.size(); ++i)
        CHECK_NEAR(std::abs(b.samples[i] - rot * a.samples[i]), 0.0, 1e-12);

    double mean_power = 0.0;
    for (const cplx& s : a.samples) mean_power += std::norm(s);
    mean_power /= a.size();
    CHECK_NEAR(mean_power, 1.0, 1e-9);

    // duration contract: sample count within one sample of L*T*fs
    CHECK(std::abs(a.size() - p.duration() * a.sample_rate) < 1.0);
}

void test_shape_pulse() {
    const double T = 1.0, B = 1.0;
    const double fs = 64.0;
    const double span = 8.0;

    auto g = shape_pulse(T, B, fs, span);
    CHECK(static_cast<int>(g.size()) == static_cast<int>(span * fs));

    // even symmetry about the center within 1e-9
    for (std::size_t i = 0; i < g.size() / 2; ++i)
        CHECK_NEAR(g[i], g[g.size() - 1 - i], 1e-9);

    // unit energy
    double e = 0.0;
    for (double v : g) e += v * v;
    CHECK_NEAR(e / fs, 1.0, 1e-12);

    // >= 99% of spectral energy inside |f| <= 1.5 B
    std::vector<cplx> cg(g.begin(), g.end());
    const int nfft = 4096;
    cg.resize(nfft, cplx(0, 0));
    auto power = dft_power(cg, nfft);
    double total = 0.0, inside = 0.0;
    for (int i = 0; i < nfft; ++i) {
        double f = (i <= nfft / 2) ? i * fs / nfft : (i - nfft) * fs / nfft;
        total += power[i];
        if (std::abs(f) <= 1.5 * B) inside += power[i];
    }
    CHECK(inside / total >= 0.99);

    CHECK_THROWS(shape_pulse(T, B, fs, 0.5 * T)); // span shorter than pulse
    CHECK_THROWS(shape_pulse(T, 0.0, fs, span));

    // B -> infinity limit: the ideal-rect shaping path gives the exact rectangle
    auto p = make_params(1, 1, 4, Shaping::IdealRect);
    BasebandSignal rect = synthesize(p, FrequencySequence{{0}}, PhaseSequence::zeros(1));
    for (const cplx& s : rect.samples) CHECK_NEAR(std::abs(s), 1.0, 1e-12);
}

void test_bandlimited_synthesis() {
    auto p = make_params(8, 8, 4, Shaping::BandlimitedRect);
    Rng rng(17);
    FrequencySequence freq;
    for (int l = 0; l < 8; ++l) freq.indices.push_back(static_cast<int>(rng.next_below(8)));
    BasebandSignal sig = synthesize(p, freq, PhaseSequence::zeros(8));
    CHECK(sig.size() == p.total_samples());
    double mean_power = 0.0;
    for (const cplx& s : sig.samples) mean_power += std::norm(s);
    CHECK_NEAR(mean_power / sig.size(), 1.0, 1e-9);
    // envelope ripple exists but is modest for B = 1/T
    double pr = papr(sig);
    CHECK(pr > 1.0 && pr < 3.0);
}

void test_errors() {
    auto p = make_params(4, 4);
    CHECK_THROWS(synthesize(p, FrequencySequence{{0, 1}}, PhaseSequence::zeros(4)));
    CHECK_THROWS(synthesize(p, FrequencySequence{{0, 1, 2, 9}}, PhaseSequence::zeros(4)));
    WaveformParams bad = p;
    bad.oversampling = 1; // below tone-grid Nyquist
    CHECK_THROWS(synthesize(bad, FrequencySequence{{0, 1, 2, 3}}, PhaseSequence::zeros(4)));
}

} // namespace

int main() {
    test_synthesize_trivial();
    test_synthesize_lsf_spectrum();
    test_papr();
    test_phase_linearity_and_energy();
    test_shape_pulse();
    test_bandlimited_synthesis();
    test_errors();
    return test_summary("test_signal");
}
