// SPDX-License-Identifier: Apache-2.0
#include "cmisac/radar_metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>

#include "cmisac/fft.hpp"

namespace cmisac {

namespace {

struct GridAxes {
    std::vector<long> lags;       // delay in samples
    std::vector<double> delays;   // seconds
    std::vector<double> dopplers; // Hz
    int origin_delay = 0;
    int origin_doppler = 0;
};

GridAxes build_axes(const BasebandSignal& sig, const AfGridConfig& cfg) {
    if (sig.samples.empty()) throw std::invalid_argument("ambiguity: empty signal");
    const double fs = sig.sample_rate;
    const long n = sig.size();
    if (cfg.delay_step <= 0.0 || cfg.doppler_step <= 0.0 || cfg.delay_span < 0.0 ||
        cfg.doppler_span < 0.0)
        throw std::invalid_argument("ambiguity: bad grid config");
    const long lag_step = std::max<long>(1, std::lround(cfg.delay_step * fs));
    const long max_lag = std::lround(cfg.delay_span * fs);
    if (max_lag > n)
        throw std::invalid_argument("ambiguity: delay span exceeds signal support");
    const long n_side = max_lag / lag_step;
    const int dop_side = static_cast<int>(std::floor(cfg.doppler_span / cfg.doppler_step + 1e-9));

    GridAxes ax;
    ax.lags.reserve(2 * n_side + 1);
    for (long i = -n_side; i <= n_side; ++i) ax.lags.push_back(i * lag_step);
    ax.delays.reserve(ax.lags.size());
    for (long d : ax.lags) ax.delays.push_back(d / fs);
    ax.dopplers.reserve(2 * dop_side + 1);
    for (int i = -dop_side; i <= dop_side; ++i) ax.dopplers.push_back(i * cfg.doppler_step);
    ax.origin_delay = static_cast<int>(n_side);
    ax.origin_doppler = dop_side;
    if (ax.lags.empty() || ax.dopplers.empty())
        throw std::invalid_argument("ambiguity: empty grid");
    return ax;
}

double signal_energy(const BasebandSignal& sig) {
    double e = 0.0;
    for (const cplx& s : sig.samples) e += std::norm(s);
    if (e <= 0.0) throw std::invalid_argument("ambiguity: zero-energy signal");
    return e;
}

} // namespace

AfGrid ambiguity(const BasebandSignal& sig, const AfGridConfig& cfg) {
    const GridAxes ax = build_axes(sig, cfg);
    const int n = sig.size();
    const double fs = sig.sample_rate;
    const double inv_e = 1.0 / signal_energy(sig);
    const int ntau = static_cast<int>(ax.lags.size());
    const int ndop = static_cast<int>(ax.dopplers.size());

    const int nfft = Fft::next_pow2(2 * n);
    const Fft fft(nfft);
    std::vector<cplx> ref(nfft, cplx(0, 0));
    std::copy(sig.samples.begin(), sig.samples.end(), ref.begin());
    fft.forward(ref);
    for (cplx& v : ref) v = std::conj(v);

    AfGrid out;
    out.delays = ax.delays;
    out.dopplers = ax.dopplers;
    out.origin_delay = ax.origin_delay;
    out.origin_doppler = ax.origin_doppler;
    out.mags.resize(static_cast<std::size_t>(ntau) * ndop);

#pragma omp parallel for schedule(static)
    for (int di = 0; di < ndop; ++di) {
        const double nu = ax.dopplers[di];
        std::vector<cplx> buf(nfft, cplx(0, 0));
        const double w = kTwoPi * nu / fs;
        for (int i = 0; i < n; ++i) {
            double a = w * i;
            buf[i] = sig.samples[i] * cplx(std::cos(a), std::sin(a));
        }
        fft.forward(buf);
        for (int i = 0; i < nfft; ++i) buf[i] *= ref[i];
        fft.inverse(buf);
        double* row = &out.mags[static_cast<std::size_t>(di) * ntau];
        for (int ti = 0; ti < ntau; ++ti) {
            long lag = ax.lags[ti];
            long idx = lag >= 0 ? lag : nfft + lag;
            row[ti] = std::abs(buf[idx]) * inv_e;
        }
    }
    return out;
}

AfGrid ambiguity_serial(const BasebandSignal& sig, const AfGridConfig& cfg) {
    const GridAxes ax = build_axes(sig, cfg);
    const int n = sig.size();
    const double fs = sig.sample_rate;
    const double inv_e = 1.0 / signal_energy(sig);
    const int ntau = static_cast<int>(ax.lags.size());
    const int ndop = static_cast<int>(ax.dopplers.size());

    AfGrid out;
    out.delays = ax.delays;
    out.dopplers = ax.dopplers;
    out.origin_delay = ax.origin_delay;
    out.origin_doppler = ax.origin_doppler;
    out.mags.resize(static_cast<std::size_t>(ntau) * ndop);

    for (int di = 0; di < ndop; ++di) {
        const double w = kTwoPi * ax.dopplers[di] / fs;
        double* row = &out.mags[static_cast<std::size_t>(di) * ntau];
        for (int ti = 0; ti < ntau; ++ti) {
            const long lag = ax.lags[ti];
            const long lo = std::max<long>(0, lag);
            const long hi = std::min<long>(n, n + lag);
            cplx acc(0, 0);
            for (long i = lo; i < hi; ++i) {
                double a = w * i;
                acc += sig.samples[i] * std::conj(sig.samples[i - lag]) *
                       cplx(std::cos(a), std::sin(a));
            }
            row[ti] = std::abs(acc) * inv_e;
        }
    }
    return out;
}

PslReport psl(const AfGrid& af, const MainlobeRegion& mainlobe) {
    bool any_outside = false;
    PslReport rep;
    rep.mainlobe = mainlobe;
    for (int di = 0; di < af.n_doppler(); ++di) {
        for (int ti = 0; ti < af.n_delay(); ++ti) {
            if (mainlobe.contains(af.delays[ti], af.dopplers[di])) continue;
            any_outside = true;
            double m = af.at(di, ti);
            if (m > rep.psl) {
                rep.psl = m;
                rep.tau = af.delays[ti];
                rep.nu = af.dopplers[di];
            }
        }
    }
    if (!any_outside)
        throw std::invalid_argument("psl: mainlobe region covers the entire grid");
    rep.psl_db = 20.0 * std::log10(std::max(rep.psl, 1e-300));
    return rep;
}

BandwidthReport rms_bandwidth(const BasebandSignal& sig) {
    if (sig.samples.empty()) throw std::invalid_argument("rms_bandwidth: empty signal");
    if (signal_energy(sig) <= 0.0)
        throw std::invalid_argument("rms_bandwidth: zero-energy signal");
    const int W = sig.params.samples_per_subpulse();
    const int L = sig.params.L;
    const int n = sig.size();
    const int nfft = Fft::next_pow2(4 * n);
    const Fft fft(nfft);
    const double fs = sig.sample_rate;

    std::vector<double> power(nfft, 0.0);
    std::vector<cplx> buf(nfft);
    for (int l = 0; l < L; ++l) {
        std::fill(buf.begin(), buf.end(), cplx(0, 0));
        const int lo = l * W;
        const int hi = std::min(n, lo + W);
        for (int i = lo; i < hi; ++i) buf[i - lo] = sig.samples[i];
        fft.forward(buf);
        for (int i = 0; i < nfft; ++i) power[i] += std::norm(buf[i]);
    }

    double total = 0.0, first = 0.0;
    for (int i = 0; i < nfft; ++i) {
        double f = (i <= nfft / 2) ? i * fs / nfft : (i - nfft) * fs / nfft;
        total += power[i];
        first += f * power[i];
    }
    const double centroid = first / total;
    double second = 0.0;
    for (int i = 0; i < nfft; ++i) {
        double f = (i <= nfft / 2) ? i * fs / nfft : (i - nfft) * fs / nfft;
        double d = f - centroid;
        second += d * d * power[i];
    }
    BandwidthReport rep;
    rep.centroid = centroid;
    rep.beta_sq_T_sq = second / total * sig.params.T * sig.params.T;
    return rep;
}

double duration(const BasebandSignal& sig) {
    return sig.params.duration();
}

void save_af_csv(const AfGrid& af, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "tau,doppler,mag\n";
    char buf[64];
    auto put = [&](double v, char sep) {
        auto r = std::to_chars(buf, buf + sizeof(buf), v);
        out.write(buf, r.ptr - buf);
        out.put(sep);
    };
    for (int di = 0; di < af.n_doppler(); ++di)
        for (int ti = 0; ti < af.n_delay(); ++ti) {
            put(af.delays[ti], ',');
            put(af.dopplers[di], ',');
            put(af.at(di, ti), '\n');
        }
}

void save_af_bin(const AfGrid& af, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    auto write_i64 = [&](std::int64_t v) {
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    };
    auto write_f64s = [&](const std::vector<double>& v) {
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * sizeof(double)));
    };
    write_i64(static_cast<std::int64_t>(af.n_delay()));
    write_i64(static_cast<std::int64_t>(af.n_doppler()));
    write_f64s(af.delays);
    write_f64s(af.dopplers);
    write_f64s(af.mags);
}

} // namespace cmisac
