// SPDX-License-Identifier: Apache-2.0
#include "cmisac/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>
#include <omp.h>

#include "cmisac/detectors.hpp"
#include "cmisac/rng.hpp"
#include "cmisac/signal.hpp"
#include "cmisac/svg.hpp"

namespace cmisac {

BoxStats box_stats(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("box_stats: empty input");
    BoxStats s;
    s.n = static_cast<int>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / s.n;
    std::sort(values.begin(), values.end());
    // quantile type 7: linear interpolation at h = (n-1)p
    auto quantile = [&](double p) {
        double h = (s.n - 1) * p;
        int lo = static_cast<int>(std::floor(h));
        int hi = std::min(lo + 1, s.n - 1);
        return values[lo] + (h - lo) * (values[hi] - values[lo]);
    };
    s.median = quantile(0.5);
    s.q1 = quantile(0.25);
    s.q3 = quantile(0.75);
    const double iqr = s.q3 - s.q1;
    const double fence_lo = s.q1 - 1.5 * iqr;
    const double fence_hi = s.q3 + 1.5 * iqr;
    s.whisker_low = s.q3;
    s.whisker_high = s.q1;
    for (double v : values) {
        if (v >= fence_lo) {
            s.whisker_low = v; // first (smallest) datum inside the fence
            break;
        }
    }
    for (auto it = values.rbegin(); it != values.rend(); ++it) {
        if (*it <= fence_hi) {
            s.whisker_high = *it;
            break;
        }
    }
    for (double v : values)
        if (v < fence_lo || v > fence_hi) s.outliers.push_back(v);
    return s;
}

namespace {

DataBits draw_bits(Rng& rng, int n) {
    DataBits bits(n);
    for (int i = 0; i < n; ++i) bits[i] = static_cast<std::uint8_t>(rng.next_bit());
    return bits;
}

std::uint64_t trial_seed(const ExperimentConfig& cfg, int scheme_idx, int trial) {
    return derive_seed(cfg.seed, static_cast<std::uint64_t>(scheme_idx) + 1,
                       static_cast<std::uint64_t>(trial) + 1);
}

std::string format_double(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

const char* scheme_color(Scheme s) {
    switch (s) {
        case Scheme::LsfQpsk: return "#1f77b4";
        case Scheme::CostasQpsk: return "#ff7f0e";
        case Scheme::Perm: return "#2ca02c";
        case Scheme::PermQpsk: return "#d62728";
        case Scheme::Fsk: return "#9467bd";
        case Scheme::FskPslMin: return "#8c564b";
        case Scheme::FskQpsk: return "#e377c2";
    }
    return "#000000";
}

nlohmann::json box_to_json(const BoxStats& s) {
    nlohmann::json j;
    j["mean"] = s.mean;
    j["median"] = s.median;
    j["q1"] = s.q1;
    j["q3"] = s.q3;
    j["whisker_low"] = s.whisker_low;
    j["whisker_high"] = s.whisker_high;
    j["outliers"] = s.outliers;
    j["n"] = s.n;
    return j;
}

} // namespace

std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg) {
    if (cfg.trials < 1) throw std::invalid_argument("run_experiment: trials must be >= 1");
    if (cfg.schemes.empty()) throw std::invalid_argument("run_experiment: no schemes");
    WaveformParams params = cfg.params();
    params.validate();
    const SchemeParams sp = cfg.scheme_params();

    AfGridConfig grid = cfg.af_grid;
    if (grid.delay_step <= 0.0) grid = AfGridConfig::defaults(params);
    MainlobeRegion lobe = cfg.mainlobe;
    if (lobe.tau_max <= 0.0 && lobe.nu_max <= 0.0) lobe = MainlobeRegion::defaults(params);

    // resource guard: keep the surface allocation sane
    const double fs = params.sample_rate();
    const double est_ntau = 2.0 * grid.delay_span / std::max(grid.delay_step, 1.0 / fs) + 1.0;
    const double est_ndop = 2.0 * grid.doppler_span / grid.doppler_step + 1.0;
    if (est_ntau * est_ndop > 5e7)
        throw std::runtime_error("run_experiment: AF grid too large (resource guard)");

    OptimizerConfig opt = cfg.optimizer;
    opt.resolve(params);

    const int n_schemes = static_cast<int>(cfg.schemes.size());
    const int total = n_schemes * cfg.trials;

    // FSK_PSLMIN needs its phase table before the (parallel) trial loop.
    PhaseCache cache(params, opt);
    bool need_cache = false;
    for (int si = 0; si < n_schemes; ++si) {
        if (cfg.schemes[si] != Scheme::FskPslMin) continue;
        need_cache = true;
        if (!cfg.phase_cache_path.empty() &&
            std::filesystem::exists(cfg.phase_cache_path)) {
            if (!cache.load(cfg.phase_cache_path))
                std::fprintf(stderr,
                             "phase cache %s does not match this configuration; rebuilding\n",
                             cfg.phase_cache_path.c_str());
        }
        std::vector<FrequencySequence> seqs;
        seqs.reserve(cfg.trials);
        for (int t = 0; t < cfg.trials; ++t) {
            Rng rng(trial_seed(cfg, si, t));
            DataBits bits = draw_bits(rng, bits_per_waveform(Scheme::FskPslMin, sp));
            // frequency part only; provider not needed to recover tones
            auto [freq, ph] = encode(Scheme::Fsk, bits, sp);
            (void)ph;
            seqs.push_back(std::move(freq));
        }
        const std::size_t before = cache.size();
        cache.build(seqs);
        if (cache.size() != before)
            std::fprintf(stderr, "optimized %zu new fsk-pslmin phase sequences\n",
                         cache.size() - before);
    }
    PhaseProvider provider = cache.provider();

    std::vector<TrialRecord> records(total);
    const int n_threads = cfg.jobs > 0 ? cfg.jobs : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic) num_threads(n_threads)
    for (int idx = 0; idx < total; ++idx) {
        const int si = idx / cfg.trials;
        const int t = idx % cfg.trials;
        const Scheme scheme = cfg.schemes[si];
        const auto t0 = std::chrono::steady_clock::now();

        Rng rng(trial_seed(cfg, si, t));
        DataBits bits = draw_bits(rng, bits_per_waveform(scheme, sp));
        auto [freq, phase] = encode(scheme, bits, sp, &provider);
        BasebandSignal sig = synthesize(params, freq, phase);
        PslReport rep = psl(ambiguity(sig, grid), lobe);
        BandwidthReport bw = rms_bandwidth(sig);

        TrialRecord& r = records[idx];
        r.scheme = scheme;
        r.trial = t;
        r.psl = rep.psl;
        r.psl_db = rep.psl_db;
        r.beta_sq_T_sq = bw.beta_sq_T_sq;
        r.bits_per_subpulse = bits_per_subpulse(scheme, sp);
        r.complexity = complexity_per_subpulse(scheme, sp.L, sp.M, sp.psk_order);
        if (cfg.timing) {
            const auto t1 = std::chrono::steady_clock::now();
            r.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        }
    }

    if (need_cache && !cfg.phase_cache_path.empty()) cache.save(cfg.phase_cache_path);
    return records;
}

std::string trials_csv_string(const std::vector<TrialRecord>& records) {
    std::string out = "scheme,trial,psl,psl_db,beta_sq_T_sq,bits_per_subpulse,complexity,wall_ms\n";
    for (const auto& r : records) {
        out += scheme_name(r.scheme);
        out += ',';
        out += std::to_string(r.trial);
        out += ',';
        out += format_double(r.psl);
        out += ',';
        out += format_double(r.psl_db);
        out += ',';
        out += format_double(r.beta_sq_T_sq);
        out += ',';
        out += format_double(r.bits_per_subpulse);
        out += ',';
        out += format_double(r.complexity);
        out += ',';
        out += format_double(r.wall_ms);
        out += '\n';
    }
    return out;
}

void emit(const std::vector<TrialRecord>& records, const ExperimentConfig& cfg) {
    if (records.empty()) throw std::invalid_argument("emit: no records");
    std::filesystem::create_directories(cfg.out_dir);
    const std::filesystem::path dir(cfg.out_dir);

    {
        std::ofstream out(dir / "trials.csv", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write trials.csv");
        out << trials_csv_string(records);
    }

    // group metric samples per scheme, preserving cfg.schemes order
    struct PerScheme {
        Scheme scheme;
        std::vector<double> psl, beta;
        double rate = 0.0, complexity = 0.0;
    };
    std::vector<PerScheme> groups;
    for (Scheme s : cfg.schemes) {
        PerScheme g;
        g.scheme = s;
        for (const auto& r : records) {
            if (r.scheme != s) continue;
            g.psl.push_back(r.psl);
            g.beta.push_back(r.beta_sq_T_sq);
            g.rate = r.bits_per_subpulse;
            g.complexity = r.complexity;
        }
        if (!g.psl.empty()) groups.push_back(std::move(g));
    }

    nlohmann::json summary;
    summary["schema_version"] = 1;
    summary["config"] = {
        {"L", cfg.L},          {"M", cfg.M},
        {"T", cfg.T},          {"delta_f", cfg.delta_f},
        {"psk_order", cfg.psk_order}, {"trials", cfg.trials},
        {"seed", cfg.seed},    {"oversampling", cfg.oversampling},
    };
    for (const auto& g : groups) {
        nlohmann::json js;
        js["psl"] = box_to_json(box_stats(g.psl));
        js["beta_sq_T_sq"] = box_to_json(box_stats(g.beta));
        js["bits_per_subpulse"] = g.rate;
        js["complexity"] = g.complexity;
        summary["schemes"][scheme_name(g.scheme)] = std::move(js);
    }
    {
        std::ofstream out(dir / "summary.json", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write summary.json");
        out << summary.dump(2) << "\n";
    }

    auto make_fig = [&](const std::string& title, const std::string& xlabel, bool use_rate,
                        bool use_psl, bool log_x) {
        FigureSpec fig;
        fig.title = title;
        fig.x_label = xlabel;
        fig.y_label = use_psl ? "AF peak sidelobe level" : "normalized squared RMS bandwidth";
        fig.log_x = log_x;
        for (const auto& g : groups) {
            BoxGlyph glyph;
            glyph.label = scheme_name(g.scheme);
            glyph.x = use_rate ? g.rate : g.complexity;
            glyph.stats = box_stats(use_psl ? g.psl : g.beta);
            glyph.color = scheme_color(g.scheme);
            fig.glyphs.push_back(std::move(glyph));
        }
        return fig;
    };
    render_box_figure(make_fig("Normalized squared RMS bandwidth vs data rate",
                               "data rate (bits/subpulse)", true, false, false),
                      (dir / "fig1.svg").string());
    render_box_figure(make_fig("Normalized squared RMS bandwidth vs detector complexity",
                               "per-subpulse detector complexity", false, false, true),
                      (dir / "fig2.svg").string());
    render_box_figure(make_fig("AF PSL vs data rate", "data rate (bits/subpulse)", true, true,
                               false),
                      (dir / "fig3.svg").string());
    render_box_figure(make_fig("AF PSL vs detector complexity",
                               "per-subpulse detector complexity", false, true, true),
                      (dir / "fig4.svg").string());
}

} // namespace cmisac
