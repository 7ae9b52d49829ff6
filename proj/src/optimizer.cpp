// SPDX-License-Identifier: Apache-2.0
#include "cmisac/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "cmisac/fft.hpp"
#include "cmisac/rng.hpp"
#include "cmisac/signal.hpp"

namespace cmisac {

namespace {

// The optimizer works on the ideal-rect model: subpulse l is W unit-modulus
// samples, so the AF is bilinear in the per-subpulse phasors and a single
// phase change only touches the terms involving that subpulse.
struct Objective {
    // grid axes (delay lags in samples, Doppler in rad/sample)
    std::vector<long> lags;
    std::vector<double> omegas;
    std::vector<std::uint32_t> outside; // flat indices outside the mainlobe
    int W = 0, L = 0, N = 0;
    double inv_e = 0.0;
    std::vector<cplx> tone; // tone[l*W + k]: subpulse-l waveform, zero phase
    Fft fft{1};
    int nfft = 1;

    Objective(const FrequencySequence& freq, const WaveformParams& p,
              const AfGridConfig& grid, const MainlobeRegion& mainlobe) {
        const double fs = p.sample_rate();
        W = p.samples_per_subpulse();
        L = p.L;
        N = W * L;
        inv_e = 1.0 / N;
        const long lag_step = std::max<long>(1, std::lround(grid.delay_step * fs));
        const long max_lag = std::lround(grid.delay_span * fs);
        if (max_lag > N) throw std::invalid_argument("optimizer: delay span exceeds signal");
        for (long i = -(max_lag / lag_step); i <= max_lag / lag_step; ++i)
            lags.push_back(i * lag_step);
        const int dop_side =
            static_cast<int>(std::floor(grid.doppler_span / grid.doppler_step + 1e-9));
        for (int i = -dop_side; i <= dop_side; ++i)
            omegas.push_back(kTwoPi * i * grid.doppler_step / fs);
        const int ntau = static_cast<int>(lags.size());
        for (int di = 0; di < static_cast<int>(omegas.size()); ++di)
            for (int ti = 0; ti < ntau; ++ti) {
                double tau = lags[ti] / fs;
                double nu = omegas[di] * fs / kTwoPi;
                if (!mainlobe.contains(tau, nu))
                    outside.push_back(static_cast<std::uint32_t>(di) * ntau + ti);
            }
        if (outside.empty())
            throw std::invalid_argument("optimizer: mainlobe covers the whole objective grid");
        tone.resize(static_cast<std::size_t>(L) * W);
        for (int l = 0; l < L; ++l) {
            double f = p.tone_frequency(freq.indices[l]);
            for (int k = 0; k < W; ++k) {
                double a = kTwoPi * f * k / fs;
                tone[static_cast<std::size_t>(l) * W + k] = cplx(std::cos(a), std::sin(a));
            }
        }
        nfft = Fft::next_pow2(2 * N);
        fft = Fft(nfft);
    }

    int ntau() const { return static_cast<int>(lags.size()); }
    int ndop() const { return static_cast<int>(omegas.size()); }
    std::size_t grid_size() const { return lags.size() * omegas.size(); }

    /// Full surface A(d, nu) = sum_n s[n] s*[n-d] e^{j w n} / E via FFT
    /// cross-correlation per Doppler bin (same machinery as ambiguity()).
    std::vector<cplx> full_surface(const std::vector<cplx>& v) const {
        std::vector<cplx> sig(N);
        for (long n = 0; n < N; ++n) sig[n] = v[n / W] * tone[n];
        std::vector<cplx> ref(nfft, cplx(0, 0));
        std::copy(sig.begin(), sig.end(), ref.begin());
        fft.forward(ref);
        for (cplx& x : ref) x = std::conj(x);

        std::vector<cplx> out(grid_size());
        std::vector<cplx> buf(nfft);
        for (int di = 0; di < ndop(); ++di) {
            const double w = omegas[di];
            std::fill(buf.begin(), buf.end(), cplx(0, 0));
            for (long i = 0; i < N; ++i) {
                double a = w * i;
                buf[i] = sig[i] * cplx(std::cos(a), std::sin(a));
            }
            fft.forward(buf);
            for (int i = 0; i < nfft; ++i) buf[i] *= ref[i];
            fft.inverse(buf);
            for (int ti = 0; ti < ntau(); ++ti) {
                const long lag = lags[ti];
                out[static_cast<std::size_t>(di) * ntau() + ti] =
                    buf[lag >= 0 ? lag : nfft + lag] * inv_e;
            }
        }
        return out;
    }

    /// C1(d, nu) = sum_n x_l[n] s_rest*[n-d] e^{j w n} / E  (x_l zero-phase).
    /// C2(d, nu) = sum_n s_rest[n] x_l*[n-d] e^{j w n} / E.
    /// Both sums run over the W samples where x_l is live.
    void coordinate_surfaces(const std::vector<cplx>& v, int l,
                             std::vector<cplx>& c1, std::vector<cplx>& c2) const {
        c1.assign(grid_size(), cplx(0, 0));
        c2.assign(grid_size(), cplx(0, 0));
        const long base = static_cast<long>(l) * W;
        std::vector<cplx> rot(W);
        for (int di = 0; di < ndop(); ++di) {
            const double w = omegas[di];
            for (long k = 0; k < W; ++k) {
                double a = w * k;
                rot[k] = cplx(std::cos(a), std::sin(a));
            }
            const double ab = w * base;
            const cplx rot_base(std::cos(ab), std::sin(ab));
            for (int ti = 0; ti < ntau(); ++ti) {
                const long lag = lags[ti];
                // x_l pairs only with samples of neighbouring subpulses, so
                // both sums run over the W samples where x_l is live.
                cplx a1(0, 0), a2(0, 0);
                const long m_lo = base - lag;        // C1 partner index of k=0
                for (long k = 0; k < W; ++k) {
                    const cplx xl = tone[base + k];
                    const long m1 = m_lo + k;
                    if (m1 >= 0 && m1 < N && m1 / W != l)
                        a1 += xl * std::conj(v[m1 / W] * tone[m1]) * rot[k];
                    const long n2 = base + k + lag;
                    if (n2 >= 0 && n2 < N && n2 / W != l)
                        a2 += v[n2 / W] * tone[n2] * std::conj(xl) * rot[k];
                }
                const std::size_t idx = static_cast<std::size_t>(di) * ntau() + ti;
                const double al = w * lag;
                c1[idx] = a1 * rot_base * inv_e;
                c2[idx] = a2 * (rot_base * cplx(std::cos(al), std::sin(al))) * inv_e;
            }
        }
    }

    double peak_outside(const std::vector<cplx>& surf) const {
        double best = 0.0;
        for (std::uint32_t idx : outside) best = std::max(best, std::abs(surf[idx]));
        return best;
    }

    double peak_outside_shifted(const std::vector<cplx>& base, const std::vector<cplx>& c1,
                                const std::vector<cplx>& c2, cplx u) const {
        const cplx uc = std::conj(u);
        double best = 0.0;
        for (std::uint32_t idx : outside)
            best = std::max(best, std::abs(base[idx] + u * c1[idx] + uc * c2[idx]));
        return best;
    }

    // p-norm surrogate of the peak, normalized by a fixed scale so that
    // candidate comparisons are overflow-safe. Monotone in the true p-norm.
    double soft_outside_shifted(const std::vector<cplx>& base, const std::vector<cplx>& c1,
                                const std::vector<cplx>& c2, cplx u, double p,
                                double scale) const {
        const cplx uc = std::conj(u);
        double acc = 0.0;
        const double inv = 1.0 / scale;
        for (std::uint32_t idx : outside) {
            double m = std::abs(base[idx] + u * c1[idx] + uc * c2[idx]) * inv;
            acc += std::pow(m, p);
        }
        return acc;
    }
};

struct RestartOutcome {
    std::vector<double> phases;
    double objective = 0.0;
    int sweeps = 0;
    std::vector<double> trace;
};

RestartOutcome run_restart(const Objective& obj, const OptimizerConfig& cfg, int restart) {
    const int L = obj.L;
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(restart)));
    std::vector<double> ph(L, 0.0);
    if (restart > 0)
        for (int l = 1; l < L; ++l) ph[l] = rng.next_double() * kTwoPi;

    std::vector<cplx> v(L), surf, c1, c2, base(obj.grid_size());
    double cur = 0.0;
    auto sync = [&] {
        for (int l = 0; l < L; ++l) v[l] = cplx(std::cos(ph[l]), std::sin(ph[l]));
        surf = obj.full_surface(v);
        cur = obj.peak_outside(surf);
    };

    RestartOutcome out;
    double incumbent = 1e300;
    int total_sweeps = 0;

    // one cyclic-coordinate-descent stage; stage_p > 0 descends on the
    // p-norm surrogate (smoothing), stage_p <= 0 on the exact peak
    auto descend = [&](double stage_p) {
        const bool exact = stage_p <= 0.0;
        const double scale = std::max(cur, 1e-12); // fixed soft normalization
        double stage_val = cur;
        if (!exact) {
            double acc = 0.0;
            for (std::uint32_t idx : obj.outside)
                acc += std::pow(std::abs(surf[idx]) / scale, stage_p);
            stage_val = acc;
        }
        for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
            ++total_sweeps;
            const double sweep_start = exact ? cur : stage_val;
            for (int l = 1; l < L; ++l) {
                obj.coordinate_surfaces(v, l, c1, c2);
                for (std::size_t i = 0; i < base.size(); ++i)
                    base[i] = surf[i] - v[l] * c1[i] - std::conj(v[l]) * c2[i];
                auto value_at = [&](double th) {
                    const cplx u(std::cos(th), std::sin(th));
                    return exact ? obj.peak_outside_shifted(base, c1, c2, u)
                                 : obj.soft_outside_shifted(base, c1, c2, u, stage_p, scale);
                };
                double best_th = ph[l];
                double best_val = exact ? cur : stage_val;
                for (int g = 0; g < cfg.phase_grid; ++g) {
                    double th = kTwoPi * g / cfg.phase_grid;
                    double val = value_at(th);
                    if (val < best_val * (1.0 - 1e-13) - 1e-15) {
                        best_val = val;
                        best_th = th;
                    }
                }
                if (cfg.line_search) {
                    // golden-section around the best candidate
                    double a = best_th - kTwoPi / cfg.phase_grid;
                    double b = best_th + kTwoPi / cfg.phase_grid;
                    const double gr = 0.6180339887498949;
                    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
                    double f1 = value_at(x1), f2 = value_at(x2);
                    for (int it = 0; it < 24; ++it) {
                        if (f1 < f2) {
                            b = x2;
                            x2 = x1;
                            f2 = f1;
                            x1 = b - gr * (b - a);
                            f1 = value_at(x1);
                        } else {
                            a = x1;
                            x1 = x2;
                            f1 = f2;
                            x2 = a + gr * (b - a);
                            f2 = value_at(x2);
                        }
                    }
                    double mid = 0.5 * (a + b);
                    double fm = value_at(mid);
                    if (fm < best_val * (1.0 - 1e-13) - 1e-15) {
                        best_val = fm;
                        best_th = mid;
                    }
                }
                if (best_val < (exact ? cur : stage_val) * (1.0 - 1e-13) - 1e-15) {
                    double wrapped = std::remainder(best_th, kTwoPi);
                    if (wrapped < 0) wrapped += kTwoPi;
                    ph[l] = wrapped;
                    v[l] = cplx(std::cos(ph[l]), std::sin(ph[l]));
                    for (std::size_t i = 0; i < base.size(); ++i)
                        surf[i] = base[i] + v[l] * c1[i] + std::conj(v[l]) * c2[i];
                    if (exact)
                        cur = best_val;
                    else
                        stage_val = best_val;
                }
            }
            if (exact) {
                out.trace.push_back(std::min(incumbent, cur));
                if (sweep_start - cur < cfg.tol) break;
            } else if (sweep_start - stage_val < cfg.tol * sweep_start) {
                break;
            }
        }
        cur = obj.peak_outside(surf); // exact value after any stage
    };

    auto full_descent = [&] {
        if (cfg.soft_start)
            for (double p : {4.0, 8.0, 16.0, 32.0, 64.0}) descend(p);
        descend(0.0);
    };

    sync();
    full_descent();
    std::vector<double> best_ph = ph;
    incumbent = cur;

    // basin hops: jitter the incumbent with decaying amplitude and re-descend
    double jitter = kPi * 0.5;
    for (int round = 0; round < cfg.perturb_rounds; ++round) {
        ph = best_ph;
        for (int l = 1; l < L; ++l) {
            ph[l] += (rng.next_double() - 0.5) * jitter;
            ph[l] = std::remainder(ph[l], kTwoPi);
            if (ph[l] < 0) ph[l] += kTwoPi;
        }
        sync();
        full_descent();
        if (cur < incumbent) {
            incumbent = cur;
            best_ph = ph;
        }
        jitter *= 0.8;
    }

    // drift-free objective for the best phases found
    for (int l = 0; l < L; ++l) v[l] = cplx(std::cos(best_ph[l]), std::sin(best_ph[l]));
    out.objective = obj.peak_outside(obj.full_surface(v));
    out.phases = std::move(best_ph);
    out.sweeps = total_sweeps;
    return out;
}

} // namespace

OptimizeResult optimize_phases(const FrequencySequence& freq,
                               const WaveformParams& params,
                               const OptimizerConfig& cfg_in) {
    params.validate();
    if (freq.size() != params.L)
        throw std::invalid_argument("optimize_phases: sequence length != L");
    OptimizerConfig cfg = cfg_in;
    cfg.resolve(params);

    const Objective obj(freq, params, cfg.af_grid, cfg.mainlobe);

    // zero-phase baseline
    std::vector<cplx> v0(params.L, cplx(1, 0));
    const double before = obj.peak_outside(obj.full_surface(v0));

    std::vector<RestartOutcome> outcomes(cfg.restarts);
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < cfg.restarts; ++r) outcomes[r] = run_restart(obj, cfg, r);

    int best = 0;
    for (int r = 1; r < cfg.restarts; ++r)
        if (outcomes[r].objective < outcomes[best].objective) best = r;

    OptimizeResult res;
    res.psl_before = before;
    res.restarts_used = cfg.restarts;
    if (outcomes[best].objective <= before) {
        res.phases.phases = outcomes[best].phases;
        res.psl_after = outcomes[best].objective;
        res.sweeps_used = outcomes[best].sweeps;
        res.sweep_trace = outcomes[best].trace;
    } else {
        // nothing beat the zero-phase start; keep it
        res.phases = PhaseSequence::zeros(params.L);
        res.psl_after = before;
        res.sweeps_used = 0;
    }
    return res;
}

// --- PhaseCache ---------------------------------------------------------------

namespace {

std::uint64_t mix_u64(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

std::uint64_t mix_double(std::uint64_t h, double d) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(d));
    std::memcpy(&bits, &d, sizeof(bits));
    return mix_u64(h, bits);
}

std::uint64_t cache_key_hash(const WaveformParams& p, const OptimizerConfig& c) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = mix_u64(h, static_cast<std::uint64_t>(p.L));
    h = mix_u64(h, static_cast<std::uint64_t>(p.M));
    h = mix_double(h, p.delta_f * p.T);
    h = mix_u64(h, static_cast<std::uint64_t>(p.oversampling));
    h = mix_double(h, c.af_grid.delay_span);
    h = mix_double(h, c.af_grid.delay_step);
    h = mix_double(h, c.af_grid.doppler_span);
    h = mix_double(h, c.af_grid.doppler_step);
    h = mix_double(h, c.mainlobe.tau_max);
    h = mix_double(h, c.mainlobe.nu_max);
    h = mix_u64(h, static_cast<std::uint64_t>(c.restarts));
    h = mix_u64(h, static_cast<std::uint64_t>(c.max_sweeps));
    h = mix_u64(h, static_cast<std::uint64_t>(c.phase_grid));
    h = mix_u64(h, c.line_search ? 1 : 0);
    h = mix_u64(h, static_cast<std::uint64_t>(c.perturb_rounds));
    h = mix_u64(h, c.soft_start ? 1 : 0);
    h = mix_u64(h, c.seed);
    return h;
}

} // namespace

PhaseCache::PhaseCache(const WaveformParams& params, const OptimizerConfig& cfg)
    : params_(params), cfg_(cfg) {
    cfg_.resolve(params_);
    key_hash_ = cache_key_hash(params_, cfg_);
}

void PhaseCache::build(const std::vector<FrequencySequence>& seqs) {
    std::vector<std::vector<int>> missing;
    for (const auto& s : seqs)
        if (!entries_.count(s.indices)) {
            missing.push_back(s.indices);
            entries_.emplace(s.indices, Entry{}); // reserve; filled below
        }
    // dedup preserved by the map insert above; drop duplicates from the list
    std::sort(missing.begin(), missing.end());
    missing.erase(std::unique(missing.begin(), missing.end()), missing.end());

    std::vector<Entry> results(missing.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < missing.size(); ++i) {
        OptimizeResult r = optimize_phases(FrequencySequence{missing[i]}, params_, cfg_);
        results[i] = Entry{r.phases, r.psl_before, r.psl_after};
    }
    for (std::size_t i = 0; i < missing.size(); ++i) entries_[missing[i]] = results[i];
}

std::optional<PhaseCache::Entry> PhaseCache::lookup(const FrequencySequence& freq) const {
    auto it = entries_.find(freq.indices);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

const PhaseCache::Entry& PhaseCache::ensure(const FrequencySequence& freq) {
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = entries_.find(freq.indices);
        if (it != entries_.end()) return it->second;
    }
    OptimizeResult r = optimize_phases(freq, params_, cfg_);
    std::lock_guard<std::mutex> lock(mu_);
    auto [it, inserted] =
        entries_.emplace(freq.indices, Entry{r.phases, r.psl_before, r.psl_after});
    (void)inserted;
    return it->second;
}

PhaseProvider PhaseCache::provider() {
    return [this](const FrequencySequence& freq) { return ensure(freq).phases; };
}

void PhaseCache::save(const std::string& path) const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["L"] = params_.L;
    j["M"] = params_.M;
    j["df_T"] = params_.delta_f * params_.T;
    j["grid_hash"] = key_hash_;
    j["seed"] = cfg_.seed;
    auto& arr = j["entries"] = nlohmann::json::array();
    for (const auto& [freq, e] : entries_) {
        nlohmann::json je;
        je["freq"] = freq;
        je["phases"] = e.phases.phases;
        je["psl_before"] = e.psl_before;
        je["psl_after"] = e.psl_after;
        arr.push_back(std::move(je));
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << j.dump(2) << "\n";
}

bool PhaseCache::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) return false;
    nlohmann::json j;
    in >> j;
    if (j.value("schema_version", 0) != 1) return false;
    if (j.value("grid_hash", std::uint64_t(0)) != key_hash_) return false;
    std::map<std::vector<int>, Entry> loaded;
    for (const auto& je : j.at("entries")) {
        Entry e;
        e.phases.phases = je.at("phases").get<std::vector<double>>();
        e.psl_before = je.at("psl_before").get<double>();
        e.psl_after = je.at("psl_after").get<double>();
        loaded.emplace(je.at("freq").get<std::vector<int>>(), std::move(e));
    }
    entries_ = std::move(loaded);
    return true;
}

} // namespace cmisac
