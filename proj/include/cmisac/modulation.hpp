// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "cmisac/types.hpp"

namespace cmisac {

enum class Scheme {
    LsfQpsk,
    CostasQpsk,
    Perm,
    PermQpsk,
    Fsk,
    FskPslMin,
    FskQpsk,
};

inline constexpr Scheme kAllSchemes[] = {
    Scheme::LsfQpsk, Scheme::CostasQpsk, Scheme::Perm,     Scheme::PermQpsk,
    Scheme::Fsk,     Scheme::FskPslMin,  Scheme::FskQpsk,
};

std::string scheme_name(Scheme s); // canonical lowercase, e.g. "lsf-qpsk"
Scheme parse_scheme(const std::string& name);

using DataBits = std::vector<std::uint8_t>; // one bit per entry, MSB-first fields

/// Minimal unsigned big integer: little-endian 64-bit limbs. Only the
/// operations needed for factorial ranking of permutations at L <= ~100.
class BigUint {
public:
    BigUint() = default;
    explicit BigUint(std::uint64_t v);

    static BigUint factorial(int n);
    static BigUint from_bits_msb(const std::uint8_t* bits, int n);

    void mul_small(std::uint64_t m);
    void add_small(std::uint64_t a);
    /// Divides in place, returns remainder. d must be nonzero.
    std::uint64_t divmod_small(std::uint64_t d);

    int bit_length() const;
    bool is_zero() const { return limbs_.empty(); }
    int get_bit(int i) const;
    int compare(const BigUint& other) const;

    std::vector<std::uint8_t> to_bits_msb(int n_bits) const;

private:
    void trim();
    std::vector<std::uint64_t> limbs_;
};

// --- frequency patterns -----------------------------------------------------

/// [0, 1, ..., L-1].
FrequencySequence lsf_sequence(int L);

/// True iff all pairwise difference vectors (j-i, seq[j]-seq[i]) are
/// distinct. Throws on non-permutation input.
bool is_costas(const FrequencySequence& seq);

/// Welch-construction Costas permutation of order L, with corner-removal
/// variants (orders p-2, p-3) and a lexicographic-first exhaustive search for
/// L <= 6. Throws if no supported construction covers L.
FrequencySequence costas_sequence(int L);

// --- permutation <-> integer ------------------------------------------------

/// Lexicographic (Lehmer) rank of a permutation of [0, L).
BigUint perm_rank(const FrequencySequence& seq);
/// Inverse of perm_rank; requires 0 <= k < L!.
FrequencySequence perm_unrank(const BigUint& k, int L);

// --- data mapping -------------------------------------------------------

struct SchemeParams {
    int L = 16;
    int M = 16;
    int psk_order = 4;
};

/// Bits carried by one whole waveform. Per subpulse divide by L.
int bits_per_waveform(Scheme s, const SchemeParams& p);
double bits_per_subpulse(Scheme s, const SchemeParams& p);

/// PSK index (0..order-1) -> carrier phase, Gray-labeled so the all-zeros
/// symbol maps to phase 0 ({00,01,11,10} -> {0, pi/2, pi, 3pi/2} for QPSK).
double psk_phase(int index, int order);
int gray_to_binary(int g);
int binary_to_gray(int b);

/// Supplies the optimized phase sequence for FSK_PSLMIN; pulled from the
/// psl-optimizer's cache at encode time.
using PhaseProvider = std::function<PhaseSequence(const FrequencySequence&)>;

/// Maps a bit block onto (frequency, phase) sequences for the scheme. The
/// FSK_PSLMIN case requires a PhaseProvider; all other schemes ignore it.
std::pair<FrequencySequence, PhaseSequence>
encode(Scheme s, const DataBits& bits, const SchemeParams& p,
       const PhaseProvider* pslmin_phases = nullptr);

/// Exact inverse of encode over its image.
DataBits decode_map(Scheme s, const FrequencySequence& freq,
                    const PhaseSequence& phase, const SchemeParams& p);

/// Rebuilds the bit block from detected symbol indices (tone indices plus
/// per-subpulse PSK indices where applicable).
DataBits symbols_to_bits(Scheme s, const FrequencySequence& freq,
                         const std::vector<int>& psk_indices,
                         const SchemeParams& p);

} // namespace cmisac
