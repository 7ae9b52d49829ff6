// SPDX-License-Identifier: Apache-2.0
//
// cmisac: constant-modulus joint radar-communication waveform toolbox.
// Subcommands: generate, af, metrics, detect-sim, optimize-phases, bench,
// reproduce-figures. Exit codes: 0 success, 1 usage error, 2 runtime error.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cmisac/bench.hpp"
#include "cmisac/detectors.hpp"
#include "cmisac/modulation.hpp"
#include "cmisac/optimizer.hpp"
#include "cmisac/radar_metrics.hpp"
#include "cmisac/rng.hpp"
#include "cmisac/signal.hpp"

namespace {

using namespace cmisac;

struct CommonOpts {
    std::string config_file;
    int L = 16;
    int M = -1; // -1 -> M = L
    double T = 1.0;
    double delta_f = -1.0; // -1 -> 1/T
    int psk_order = 4;
    std::uint64_t seed = 26;
    int oversampling = 2;
    double doppler_span = -1.0;  // units of delta_f; -1 -> M/2
    std::string mainlobe = "1,1"; // tau_max/T , nu_max*(L*T)
    std::string shaping = "ideal";
    int jobs = 0;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--L", L, "subpulse count");
        cmd->add_option("--M", M, "tone count (default: L)");
        cmd->add_option("--T", T, "subpulse width, seconds");
        cmd->add_option("--delta-f", delta_f, "tone spacing, Hz (default: 1/T)");
        cmd->add_option("--order", psk_order, "PSK order for *-qpsk schemes");
        cmd->add_option("--seed", seed, "RNG seed");
        cmd->add_option("--oversampling", oversampling, "samples per 1/(M*delta_f)");
        cmd->add_option("--doppler-span", doppler_span,
                        "AF Doppler half-span in units of delta_f (default: M/2)");
        cmd->add_option("--mainlobe", mainlobe,
                        "mainlobe exclusion 'a,b': |tau|<=a*T and |nu|<=b/(L*T)");
        cmd->add_option("--jobs", jobs, "worker threads (0 = library default)")
            ->envname("CMISAC_JOBS");
        cmd->add_option("--config", config_file,
                        "flat key=value file supplying any flag not given explicitly");
    }

    void resolve() {
        if (M < 0) M = L;
        if (delta_f < 0) delta_f = 1.0 / T;
    }

    WaveformParams params() const {
        WaveformParams p;
        p.L = L;
        p.T = T;
        p.delta_f = delta_f;
        p.M = M;
        p.oversampling = oversampling;
        p.shaping = shaping == "bandlimited" ? Shaping::BandlimitedRect : Shaping::IdealRect;
        if (!p.orthogonal_spacing())
            std::fprintf(stderr, "note: delta_f*T = %g (non-orthogonal tone spacing)\n",
                         p.delta_f * p.T);
        return p;
    }

    AfGridConfig grid(const WaveformParams& p) const {
        AfGridConfig g = AfGridConfig::defaults(p);
        if (doppler_span > 0) g.doppler_span = doppler_span * p.delta_f;
        return g;
    }

    MainlobeRegion lobe(const WaveformParams& p) const {
        double a = 1.0, b = 1.0;
        if (std::sscanf(mainlobe.c_str(), "%lf,%lf", &a, &b) != 2)
            throw CLI::ValidationError("--mainlobe", "expected 'a,b'");
        return {a * p.T, b / p.duration()};
    }
};

DataBits random_bits(Rng& rng, int n) {
    DataBits bits(n);
    for (int i = 0; i < n; ++i) bits[i] = static_cast<std::uint8_t>(rng.next_bit());
    return bits;
}

// Expands `--config FILE` into injected --key=value arguments (flat key=value
// format, keys identical to the long flags). Explicit flags win over the file.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    for (std::string line; std::getline(in, line);) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t\r"));
            auto last = s.find_last_not_of(" \t\r");
            s.erase(last == std::string::npos ? 0 : last + 1);
            return s;
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) continue;
        const std::string flag = "--" + key;
        bool given = false;
        for (const auto& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) given = true;
        if (given) continue;
        if (value == "true") {
            args.push_back(flag);
        } else if (value == "false") {
            // flag absent
        } else {
            std::stringstream vs(value); // repeatable options: comma-separated
            std::string item;
            while (std::getline(vs, item, ','))
                args.push_back(flag + "=" + item);
        }
    }
    return args;
}

// Builds one waveform realization of the scheme from the seed's bit stream.
std::pair<FrequencySequence, PhaseSequence>
realize(Scheme scheme, const CommonOpts& o, PhaseCache* cache) {
    SchemeParams sp{o.L, o.M, o.psk_order};
    Rng rng(o.seed);
    DataBits bits = random_bits(rng, bits_per_waveform(scheme, sp));
    if (scheme == Scheme::FskPslMin) {
        PhaseProvider provider = cache->provider();
        return encode(scheme, bits, sp, &provider);
    }
    return encode(scheme, bits, sp);
}

PhaseCache default_cache(const CommonOpts& o) {
    OptimizerConfig opt; // bench-default budget optimizer
    ExperimentConfig defaults;
    opt = defaults.optimizer;
    opt.resolve(o.params());
    return PhaseCache(o.params(), opt);
}

int cmd_generate(const CommonOpts& o, const std::string& scheme_str, const std::string& out) {
    Scheme scheme = parse_scheme(scheme_str);
    PhaseCache cache = default_cache(o);
    auto [freq, phase] = realize(scheme, o, &cache);
    BasebandSignal sig = synthesize(o.params(), freq, phase);
    std::printf("scheme=%s L=%d M=%d samples=%d sample_rate=%g\n", scheme_str.c_str(), o.L,
                o.M, sig.size(), sig.sample_rate);
    std::printf("papr=%.12f duration=%g\n", papr(sig), duration(sig));
    if (!out.empty()) {
        save_signal_bin(sig, out + ".bin");
        save_signal_csv(sig, out + ".csv");
        std::printf("wrote %s.bin and %s.csv\n", out.c_str(), out.c_str());
    }
    return 0;
}

int cmd_af(const CommonOpts& o, const std::string& scheme_str, const std::string& out,
           bool zero_phase) {
    Scheme scheme = parse_scheme(scheme_str);
    PhaseCache cache = default_cache(o);
    auto [freq, phase] = realize(scheme, o, &cache);
    if (zero_phase) phase = PhaseSequence::zeros(o.L);
    WaveformParams p = o.params();
    BasebandSignal sig = synthesize(p, freq, phase);
    AfGrid af = ambiguity(sig, o.grid(p));
    PslReport rep = psl(af, o.lobe(p));
    std::printf("grid: %d delays x %d dopplers\n", af.n_delay(), af.n_doppler());
    std::printf("psl=%.9f psl_db=%.4f at tau=%g nu=%g\n", rep.psl, rep.psl_db, rep.tau, rep.nu);
    if (!out.empty()) {
        save_af_csv(af, out + ".csv");
        save_af_bin(af, out + ".bin");
        std::printf("wrote %s.csv and %s.bin\n", out.c_str(), out.c_str());
    }
    return 0;
}

int cmd_metrics(const CommonOpts& o, const std::string& scheme_str) {
    Scheme scheme = parse_scheme(scheme_str);
    PhaseCache cache = default_cache(o);
    auto [freq, phase] = realize(scheme, o, &cache);
    BasebandSignal sig = synthesize(o.params(), freq, phase);
    BandwidthReport bw = rms_bandwidth(sig);
    std::printf("beta_sq_T_sq=%.9f centroid=%g papr=%.12f duration=%g\n", bw.beta_sq_T_sq,
                bw.centroid, papr(sig), duration(sig));
    return 0;
}

int cmd_detect_sim(const CommonOpts& o, const std::string& scheme_str, double snr_db,
                   int trials, bool coherent, const std::string& dump_y,
                   const std::string& dump_decisions) {
    Scheme scheme = parse_scheme(scheme_str);
    SchemeParams sp{o.L, o.M, o.psk_order};
    WaveformParams p = o.params();
    PhaseCache cache = default_cache(o);
    PhaseProvider provider = cache.provider();

    std::ofstream decisions;
    if (!dump_decisions.empty()) {
        decisions.open(dump_decisions);
        if (!decisions) throw std::runtime_error("cannot open " + dump_decisions);
        decisions << "trial,subpulse,tone_tx,tone_hat,psk_tx,psk_hat\n";
    }

    long tone_errors = 0, psk_errors = 0, bit_errors = 0, waveform_errors = 0;
    long total_bits = 0;
    std::vector<double> detect_us;
    for (int t = 0; t < trials; ++t) {
        Rng rng(derive_seed(o.seed, 0xD37EC7, t));
        DataBits bits = random_bits(rng, bits_per_waveform(scheme, sp));
        auto [freq, phase] = encode(scheme, bits, sp, &provider);
        BasebandSignal sig = synthesize(p, freq, phase);
        ChannelConfig ch;
        ch.snr_db = snr_db;
        ch.seed = derive_seed(o.seed, 0xA36A11, t);
        BasebandSignal rx = awgn(sig, ch);
        FilterBankOutput yb = matched_filter_bank(rx, p);
        if (!dump_y.empty() && t == 0) save_filter_bank_csv(yb, dump_y);

        const auto t0 = std::chrono::steady_clock::now();
        DetectionResult det =
            (scheme == Scheme::Perm && coherent)
                ? detect_permutation(yb, sp, true)
                : detect(scheme, yb, sp);
        const auto t1 = std::chrono::steady_clock::now();
        detect_us.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());

        for (int l = 0; l < o.L; ++l)
            if (det.freq_hat.indices[l] != freq.indices[l]) ++tone_errors;
        std::vector<int> tx_psk(o.L, 0);
        if (!det.psk_hat.empty()) {
            for (int l = 0; l < o.L; ++l) {
                tx_psk[l] = static_cast<int>(std::lround(phase.phases[l] / (kTwoPi / o.psk_order))) %
                            o.psk_order;
                if (det.psk_hat[l] != tx_psk[l]) ++psk_errors;
            }
        }
        if (decisions.is_open())
            for (int l = 0; l < o.L; ++l)
                decisions << t << ',' << l << ',' << freq.indices[l] << ','
                          << det.freq_hat.indices[l] << ',' << tx_psk[l] << ','
                          << (det.psk_hat.empty() ? -1 : det.psk_hat[l]) << '\n';
        total_bits += static_cast<long>(bits.size());
        if (det.bits_hat.size() != bits.size()) {
            bit_errors += static_cast<long>(bits.size());
            ++waveform_errors;
        } else {
            long be = 0;
            for (std::size_t i = 0; i < bits.size(); ++i)
                if (bits[i] != det.bits_hat[i]) ++be;
            bit_errors += be;
            if (be) ++waveform_errors;
        }
    }
    std::sort(detect_us.begin(), detect_us.end());
    std::printf("scheme=%s trials=%d snr_db=%g\n", scheme_str.c_str(), trials, snr_db);
    std::printf("tone_symbol_errors=%ld psk_symbol_errors=%ld bit_errors=%ld/%ld "
                "waveform_errors=%ld\n",
                tone_errors, psk_errors, bit_errors, total_bits, waveform_errors);
    std::printf("median_detect_us=%.2f\n", detect_us[detect_us.size() / 2]);
    return 0;
}

int cmd_optimize_phases(const CommonOpts& o, int count, const std::string& cache_path,
                        OptimizerConfig opt) {
    WaveformParams p = o.params();
    opt.resolve(p);
    PhaseCache cache(p, opt);
    if (!cache_path.empty() && std::filesystem::exists(cache_path)) {
        if (!cache.load(cache_path))
            std::fprintf(stderr, "cache key mismatch; starting fresh\n");
    }
    SchemeParams sp{o.L, o.M, o.psk_order};
    std::vector<FrequencySequence> seqs;
    for (int i = 0; i < count; ++i) {
        Rng rng(derive_seed(o.seed, 0x0F5E0, i));
        DataBits bits = random_bits(rng, bits_per_waveform(Scheme::Fsk, sp));
        seqs.push_back(encode(Scheme::Fsk, bits, sp).first);
    }
    cache.build(seqs);
    double before = 0.0, after = 0.0;
    int n = 0;
    for (const auto& s : seqs) {
        auto e = cache.lookup(s);
        if (!e) continue;
        before += e->psl_before;
        after += e->psl_after;
        ++n;
    }
    std::printf("optimized %d sequences: mean psl %.6f -> %.6f\n", n, before / n, after / n);
    if (!cache_path.empty()) {
        cache.save(cache_path);
        std::printf("cache (%zu entries) written to %s\n", cache.size(), cache_path.c_str());
    }
    return 0;
}

int run_bench(ExperimentConfig cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<TrialRecord> records = run_experiment(cfg);
    emit(records, cfg);
    const auto t1 = std::chrono::steady_clock::now();
    std::printf("%zu records -> %s (%.1f s)\n", records.size(), cfg.out_dir.c_str(),
                std::chrono::duration<double>(t1 - t0).count());
    for (Scheme s : cfg.schemes) {
        std::vector<double> psls;
        for (const auto& r : records)
            if (r.scheme == s) psls.push_back(r.psl);
        if (psls.empty()) continue;
        BoxStats b = box_stats(psls);
        std::printf("  %-12s mean_psl=%.4f median=%.4f iqr=[%.4f,%.4f]\n",
                    scheme_name(s).c_str(), b.mean, b.median, b.q1, b.q3);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"constant-modulus joint radar-communication waveform toolbox"};
    app.require_subcommand(1);

    CommonOpts common;
    std::string scheme_str = "fsk";
    std::string out_path;
    bool zero_phase = false;
    double snr_db = 10.0;
    int sim_trials = 100;
    int bench_trials = 50;
    int rep_trials = 100;
    bool coherent = false;
    std::string dump_y;
    std::string dump_decisions;
    int opt_count = 16;
    std::string cache_path;
    OptimizerConfig opt_cfg;
    std::vector<std::string> bench_schemes;
    std::string out_dir = "out";
    bool timing = false;
    bool paper = false;

    std::vector<std::string> scheme_names;
    for (Scheme s : kAllSchemes) scheme_names.push_back(scheme_name(s));
    const auto scheme_check = CLI::IsMember(scheme_names);

    auto add_optimizer_flags = [&](CLI::App* cmd) {
        cmd->add_option("--restarts", opt_cfg.restarts, "optimizer restarts");
        cmd->add_option("--sweeps", opt_cfg.max_sweeps, "max coordinate sweeps");
        cmd->add_option("--phase-grid", opt_cfg.phase_grid, "candidate phases per step");
        cmd->add_flag("--no-line-search", [&](std::int64_t) { opt_cfg.line_search = false; },
                      "disable golden-section refinement");
        cmd->add_option("--opt-tol", opt_cfg.tol, "per-sweep improvement tolerance");
    };

    auto* gen = app.add_subcommand("generate", "synthesize one waveform from seeded data bits");
    common.add_to(gen);
    gen->add_option("--scheme", scheme_str, "signalling scheme")->required()->check(scheme_check);
    gen->add_option("--out", out_path, "output path prefix (.bin/.csv)");
    gen->add_option("--shaping", common.shaping, "ideal | bandlimited");

    auto* af = app.add_subcommand("af", "ambiguity surface and PSL of one waveform");
    common.add_to(af);
    af->add_option("--scheme", scheme_str, "signalling scheme")->required()->check(scheme_check);
    af->add_option("--out", out_path, "output path prefix (.csv/.bin)");
    af->add_option("--shaping", common.shaping, "ideal | bandlimited");
    af->add_flag("--zero-phase", zero_phase, "zero all initial phases");

    auto* met = app.add_subcommand("metrics", "bandwidth, PAPR and duration of one waveform");
    common.add_to(met);
    met->add_option("--scheme", scheme_str, "signalling scheme")->required()->check(scheme_check);
    met->add_option("--shaping", common.shaping, "ideal | bandlimited");

    auto* sim = app.add_subcommand("detect-sim", "noisy symbol-detection trials");
    common.add_to(sim);
    sim->add_option("--scheme", scheme_str, "signalling scheme")->required()->check(scheme_check);
    sim->add_option("--snr", snr_db, "per-subpulse SNR, dB");
    sim->add_option("--trials", sim_trials, "number of waveforms");
    sim->add_flag("--coherent", coherent, "coherent permutation statistic");
    sim->add_option("--dump-y", dump_y, "write first trial's filter-bank CSV here");
    sim->add_option("--dump-decisions", dump_decisions,
                    "write per-subpulse decision CSV here");

    auto* optc = app.add_subcommand("optimize-phases", "build/extend the PSL phase cache");
    common.add_to(optc);
    optc->add_option("--count", opt_count, "random FSK sequences to optimize");
    optc->add_option("--cache", cache_path, "cache file (JSON), loaded if present");
    add_optimizer_flags(optc);

    auto* ben = app.add_subcommand("bench", "Monte-Carlo metric comparison");
    common.add_to(ben);
    ben->add_option("--scheme", bench_schemes, "schemes (repeatable; default: all 7)")->check(scheme_check);
    ben->add_option("--trials", bench_trials, "realizations per scheme")->capture_default_str();
    ben->add_option("--out", out_dir, "output directory");
    ben->add_flag("--timing", timing, "record real wall_ms (breaks byte determinism)");
    ben->add_option("--phase-cache", cache_path, "fsk-pslmin cache file to load/extend");
    add_optimizer_flags(ben);

    auto* rep = app.add_subcommand("reproduce-figures",
                                   "bench with the full-protocol defaults (L=64, M=64)");
    common.add_to(rep);
    rep->add_option("--trials", rep_trials, "realizations per scheme (default 100)");
    rep->add_option("--out", out_dir, "output directory");
    rep->add_flag("--paper", paper, "full scale: 1000 trials");
    rep->add_flag("--timing", timing, "record real wall_ms");
    rep->add_option("--phase-cache", cache_path, "fsk-pslmin cache file to load/extend");

    std::vector<std::string> args;
    try {
        args = expand_config(argc, argv);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    std::reverse(args.begin(), args.end()); // CLI11 vector parse order
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        common.resolve();
        if (gen->parsed()) return cmd_generate(common, scheme_str, out_path);
        if (af->parsed()) return cmd_af(common, scheme_str, out_path, zero_phase);
        if (met->parsed()) return cmd_metrics(common, scheme_str);
        if (sim->parsed())
            return cmd_detect_sim(common, scheme_str, snr_db, sim_trials, coherent, dump_y,
                                  dump_decisions);
        if (optc->parsed()) return cmd_optimize_phases(common, opt_count, cache_path, opt_cfg);

        if (ben->parsed() || rep->parsed()) {
            ExperimentConfig cfg;
            if (rep->parsed()) {
                // paper waveform defaults; desk-scale trial count unless --paper
                cfg = ExperimentConfig::paper_preset();
                cfg.trials = paper ? 1000 : rep_trials;
                if (rep->count("--L")) {
                    cfg.L = common.L;
                    cfg.M = rep->count("--M") ? common.M : common.L;
                    cfg.optimizer.af_grid = AfGridConfig{}; // resolve to grid defaults
                } else if (rep->count("--M")) {
                    cfg.M = common.M;
                }
                if (rep->count("--oversampling")) cfg.oversampling = common.oversampling;
            } else {
                cfg.L = common.L;
                cfg.M = common.M;
                cfg.trials = bench_trials;
                cfg.oversampling = common.oversampling;
                if (ben->count("--restarts") || ben->count("--sweeps") ||
                    ben->count("--phase-grid") || ben->count("--no-line-search") ||
                    ben->count("--opt-tol"))
                    cfg.optimizer = opt_cfg;
                if (!bench_schemes.empty()) {
                    cfg.schemes.clear();
                    for (const auto& s : bench_schemes) cfg.schemes.push_back(parse_scheme(s));
                }
            }
            cfg.T = common.T;
            cfg.delta_f = common.delta_f;
            cfg.psk_order = common.psk_order;
            cfg.seed = common.seed;
            cfg.jobs = common.jobs;
            cfg.timing = timing;
            cfg.out_dir = out_dir;
            cfg.phase_cache_path = cache_path;
            WaveformParams wp = cfg.params();
            if (common.doppler_span > 0 || common.mainlobe != "1,1") {
                cfg.af_grid = common.grid(wp);
                cfg.mainlobe = common.lobe(wp);
            }
            return run_bench(cfg);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
