// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>

#include "cmisac/types.hpp"

namespace cmisac {

/// Small deterministic generator (splitmix64 core). Used instead of the
/// standard distributions so that seeded streams are stable across standard
/// library implementations; Monte-Carlo reproducibility contracts depend on
/// the exact draw sequence.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        // 64-bit multiply-shift; bias is negligible for the small n used here.
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    int next_bit() { return static_cast<int>(next_u64() >> 63); }

    /// Standard complex Gaussian, E|z|^2 = 1 (Box-Muller).
    cplx next_cgauss() {
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        double r = std::sqrt(-std::log(u1));
        return cplx(r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2));
    }

private:
    std::uint64_t state_;
};

/// Mixes independent stream labels into one seed; used to derive per-trial /
/// per-restart streams so results do not depend on execution order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    Rng r(seed ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xd1b54a32d192ed03ULL));
    return r.next_u64();
}

} // namespace cmisac
