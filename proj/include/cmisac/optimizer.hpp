// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "cmisac/modulation.hpp"
#include "cmisac/radar_metrics.hpp"
#include "cmisac/types.hpp"

namespace cmisac {

/// Knobs for the phase-sequence PSL minimizer. af_grid/mainlobe define the
/// objective; defaults() mirrors the reporting grid.
struct OptimizerConfig {
    int restarts = 1;       // restart 0 starts from zero phases, others random
    int max_sweeps = 8;     // full coordinate passes per descent
    int phase_grid = 8;     // candidate phases per coordinate step
    bool line_search = true; // golden-section refinement around the best candidate
    int perturb_rounds = 0; // basin hops: re-descend from a jittered best solution
    bool soft_start = true; // precede the max-descent with p-norm smoothing stages
    double tol = 1e-4;      // minimum PSL improvement per sweep to continue
    std::uint64_t seed = 1;
    AfGridConfig af_grid;   // objective grid; zero-initialized -> defaults(params)
    MainlobeRegion mainlobe; // zero-initialized -> defaults(params)

    void resolve(const WaveformParams& p) {
        if (af_grid.delay_step <= 0.0) af_grid = AfGridConfig::defaults(p);
        if (mainlobe.tau_max <= 0.0 && mainlobe.nu_max <= 0.0)
            mainlobe = MainlobeRegion::defaults(p);
        if (restarts < 1 || max_sweeps < 1 || phase_grid < 2 || tol <= 0.0 ||
            perturb_rounds < 0)
            throw std::invalid_argument("OptimizerConfig: bad settings");
    }
};

struct OptimizeResult {
    PhaseSequence phases;
    double psl_before = 0.0;
    double psl_after = 0.0;
    int sweeps_used = 0;
    int restarts_used = 0;
    std::vector<double> sweep_trace; // incumbent objective after each sweep (winning restart)
};

/// Minimizes the AF PSL of the ideal-rect waveform for the given tone
/// sequence over per-subpulse initial phases (first phase pinned to 0).
/// Multi-start cyclic coordinate descent; each coordinate step scans
/// phase_grid candidates and optionally refines with a golden section.
/// Deterministic for fixed (freq, params, cfg); restarts run under OpenMP.
OptimizeResult optimize_phases(const FrequencySequence& freq,
                               const WaveformParams& params,
                               const OptimizerConfig& cfg);

/// Precomputed phase sequences keyed by frequency sequence, so Monte-Carlo
/// runs pay for each distinct sequence once. Persistable to versioned JSON.
class PhaseCache {
public:
    struct Entry {
        PhaseSequence phases;
        double psl_before = 0.0;
        double psl_after = 0.0;
    };

    PhaseCache(const WaveformParams& params, const OptimizerConfig& cfg);

    /// Optimizes every not-yet-cached sequence (deduplicated) in parallel.
    void build(const std::vector<FrequencySequence>& seqs);

    std::optional<Entry> lookup(const FrequencySequence& freq) const;

    /// Lookup that optimizes on miss (thread-safe).
    const Entry& ensure(const FrequencySequence& freq);

    /// Adapter for encode(); optimizes on miss.
    PhaseProvider provider();

    std::size_t size() const { return entries_.size(); }

    void save(const std::string& path) const;
    /// Returns false (and leaves the cache empty) if the file's key does not
    /// match this cache's parameters.
    bool load(const std::string& path);

    std::uint64_t key_hash() const { return key_hash_; }

private:
    WaveformParams params_;
    OptimizerConfig cfg_;
    std::uint64_t key_hash_;
    std::map<std::vector<int>, Entry> entries_;
    std::mutex mu_;
};

} // namespace cmisac
