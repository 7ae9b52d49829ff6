// SPDX-License-Identifier: Apache-2.0
#include "cmisac/modulation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <set>

namespace cmisac {

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::LsfQpsk: return "lsf-qpsk";
        case Scheme::CostasQpsk: return "costas-qpsk";
        case Scheme::Perm: return "perm";
        case Scheme::PermQpsk: return "perm-qpsk";
        case Scheme::Fsk: return "fsk";
        case Scheme::FskPslMin: return "fsk-pslmin";
        case Scheme::FskQpsk: return "fsk-qpsk";
    }
    throw std::invalid_argument("scheme_name: bad scheme");
}

Scheme parse_scheme(const std::string& name) {
    for (Scheme s : kAllSchemes)
        if (scheme_name(s) == name) return s;
    throw std::invalid_argument("unknown scheme: " + name);
}

// --- BigUint -----------------------------------------------------------------

BigUint::BigUint(std::uint64_t v) {
    if (v) limbs_.push_back(v);
}

void BigUint::trim() {
    while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
}

void BigUint::mul_small(std::uint64_t m) {
    unsigned __int128 carry = 0;
    for (auto& limb : limbs_) {
        unsigned __int128 cur = static_cast<unsigned __int128>(limb) * m + carry;
        limb = static_cast<std::uint64_t>(cur);
        carry = cur >> 64;
    }
    while (carry) {
        limbs_.push_back(static_cast<std::uint64_t>(carry));
        carry >>= 64;
    }
    if (m == 0) limbs_.clear();
}

void BigUint::add_small(std::uint64_t a) {
    std::uint64_t carry = a;
    for (auto& limb : limbs_) {
        std::uint64_t prev = limb;
        limb += carry;
        carry = (limb < prev) ? 1 : 0;
        if (!carry) return;
    }
    if (carry) limbs_.push_back(carry);
}

std::uint64_t BigUint::divmod_small(std::uint64_t d) {
    if (d == 0) throw std::invalid_argument("BigUint: divide by zero");
    unsigned __int128 rem = 0;
    for (int i = static_cast<int>(limbs_.size()) - 1; i >= 0; --i) {
        unsigned __int128 cur = (rem << 64) | limbs_[i];
        limbs_[i] = static_cast<std::uint64_t>(cur / d);
        rem = cur % d;
    }
    trim();
    return static_cast<std::uint64_t>(rem);
}

int BigUint::bit_length() const {
    if (limbs_.empty()) return 0;
    std::uint64_t top = limbs_.back();
    int bits = 0;
    while (top) {
        ++bits;
        top >>= 1;
    }
    return bits + 64 * (static_cast<int>(limbs_.size()) - 1);
}

int BigUint::get_bit(int i) const {
    int limb = i / 64, off = i % 64;
    if (limb >= static_cast<int>(limbs_.size())) return 0;
    return static_cast<int>((limbs_[limb] >> off) & 1u);
}

int BigUint::compare(const BigUint& other) const {
    if (limbs_.size() != other.limbs_.size())
        return limbs_.size() < other.limbs_.size() ? -1 : 1;
    for (int i = static_cast<int>(limbs_.size()) - 1; i >= 0; --i)
        if (limbs_[i] != other.limbs_[i]) return limbs_[i] < other.limbs_[i] ? -1 : 1;
    return 0;
}

BigUint BigUint::factorial(int n) {
    BigUint r(1);
    for (int i = 2; i <= n; ++i) r.mul_small(static_cast<std::uint64_t>(i));
    return r;
}

BigUint BigUint::from_bits_msb(const std::uint8_t* bits, int n) {
    BigUint r;
    for (int i = 0; i < n; ++i) {
        r.mul_small(2);
        if (bits[i]) r.add_small(1);
    }
    return r;
}

std::vector<std::uint8_t> BigUint::to_bits_msb(int n_bits) const {
    if (bit_length() > n_bits)
        throw std::invalid_argument("BigUint: value does not fit in the bit field");
    std::vector<std::uint8_t> out(n_bits);
    for (int i = 0; i < n_bits; ++i)
        out[n_bits - 1 - i] = static_cast<std::uint8_t>(get_bit(i));
    return out;
}

// --- frequency patterns -------------------------------------------------------

FrequencySequence lsf_sequence(int L) {
    if (L < 1) throw std::invalid_argument("lsf_sequence: L must be >= 1");
    FrequencySequence s;
    s.indices.resize(L);
    std::iota(s.indices.begin(), s.indices.end(), 0);
    return s;
}

bool is_costas(const FrequencySequence& seq) {
    if (!seq.is_permutation())
        throw std::invalid_argument("is_costas: input is not a permutation");
    const int L = seq.size();
    std::set<std::pair<int, int>> diffs;
    for (int i = 0; i < L; ++i)
        for (int j = i + 1; j < L; ++j)
            if (!diffs.insert({j - i, seq.indices[j] - seq.indices[i]}).second)
                return false;
    return true;
}

namespace {

bool is_prime(int p) {
    if (p < 2) return false;
    for (int d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

int smallest_primitive_root(int p) {
    // Factor p-1, then test candidates.
    int n = p - 1;
    std::vector<int> factors;
    int m = n;
    for (int d = 2; d * d <= m; ++d) {
        if (m % d == 0) {
            factors.push_back(d);
            while (m % d == 0) m /= d;
        }
    }
    if (m > 1) factors.push_back(m);
    auto pow_mod = [p](long long b, long long e) {
        long long r = 1;
        b %= p;
        while (e) {
            if (e & 1) r = r * b % p;
            b = b * b % p;
            e >>= 1;
        }
        return static_cast<int>(r);
    };
    for (int g = 2; g < p; ++g) {
        bool ok = true;
        for (int f : factors)
            if (pow_mod(g, n / f) == 1) {
                ok = false;
                break;
            }
        if (ok) return g;
    }
    throw std::runtime_error("no primitive root found");
}

// Welch order p-1: a_i = alpha^(i+1) mod p, values shifted to [0, p-2].
std::vector<int> welch_w1(int p, int alpha) {
    std::vector<int> seq(p - 1);
    long long x = 1;
    for (int i = 0; i < p - 1; ++i) {
        x = x * alpha % p;
        seq[i] = static_cast<int>(x) - 1;
    }
    return seq;
}

// Removing the corner dot (last position, value 0) of W1 gives order p-2;
// removing the then-corner (first position, value 0) requires alpha = 2 and
// gives order p-3.
std::vector<int> corner_remove_last(std::vector<int> seq) {
    seq.pop_back(); // W1 ends with alpha^(p-1) = 1 -> shifted value 0
    for (auto& v : seq) --v;
    return seq;
}

std::vector<int> corner_remove_first(std::vector<int> seq) {
    seq.erase(seq.begin()); // requires the first value to be the minimum
    for (auto& v : seq) --v;
    return seq;
}

bool exhaustive_costas(int L, std::vector<int>& out) {
    std::vector<int> perm(L);
    std::iota(perm.begin(), perm.end(), 0);
    do {
        FrequencySequence c{perm};
        if (is_costas(c)) {
            out = perm;
            return true;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return false;
}

} // namespace

FrequencySequence costas_sequence(int L) {
    if (L < 1) throw std::invalid_argument("costas_sequence: L must be >= 1");
    // constructions are deterministic; cache per order
    static std::mutex mu;
    static std::map<int, std::vector<int>> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(L);
        if (it != cache.end()) return FrequencySequence{it->second};
    }
    std::vector<int> seq;
    if (L <= 6) {
        if (!exhaustive_costas(L, seq))
            throw std::runtime_error("costas_sequence: exhaustive search failed");
    } else if (is_prime(L + 1)) {
        seq = welch_w1(L + 1, smallest_primitive_root(L + 1));
    } else if (is_prime(L + 2)) {
        seq = corner_remove_last(welch_w1(L + 2, smallest_primitive_root(L + 2)));
    } else if (is_prime(L + 3) && smallest_primitive_root(L + 3) == 2) {
        seq = corner_remove_first(
            corner_remove_last(welch_w1(L + 3, 2)));
    } else {
        throw std::invalid_argument(
            "costas_sequence: no supported construction for order " + std::to_string(L) +
            " (need L+1 or L+2 prime, or L+3 prime with primitive root 2, or L <= 6)");
    }
    FrequencySequence out{std::move(seq)};
    if (!is_costas(out)) throw std::runtime_error("costas_sequence: construction failed verification");
    {
        std::lock_guard<std::mutex> lock(mu);
        cache.emplace(L, out.indices);
    }
    return out;
}

// --- permutation ranking -------------------------------------------------------

BigUint perm_rank(const FrequencySequence& seq) {
    if (!seq.is_permutation())
        throw std::invalid_argument("perm_rank: input is not a permutation");
    const int L = seq.size();
    // Lehmer digit = count of smaller elements to the right; Horner
    // accumulation in the falling-factorial base.
    BigUint rank;
    for (int i = 0; i < L; ++i) {
        int smaller = 0;
        for (int j = i + 1; j < L; ++j)
            if (seq.indices[j] < seq.indices[i]) ++smaller;
        rank.mul_small(static_cast<std::uint64_t>(L - i));
        rank.add_small(static_cast<std::uint64_t>(smaller));
    }
    return rank;
}

FrequencySequence perm_unrank(const BigUint& k, int L) {
    if (L < 1) throw std::invalid_argument("perm_unrank: L must be >= 1");
    if (k.compare(BigUint::factorial(L)) >= 0)
        throw std::invalid_argument("perm_unrank: rank out of range");
    // Factoradic digits least-significant first via small divisions.
    BigUint v = k;
    std::vector<int> code(L, 0); // code[i] in [0, L-1-i]
    for (int j = 2; j <= L; ++j)
        code[L - j] = static_cast<int>(v.divmod_small(static_cast<std::uint64_t>(j)));
    std::vector<int> items(L);
    std::iota(items.begin(), items.end(), 0);
    FrequencySequence out;
    out.indices.reserve(L);
    for (int i = 0; i < L; ++i) {
        out.indices.push_back(items[code[i]]);
        items.erase(items.begin() + code[i]);
    }
    return out;
}

// --- data mapping ---------------------------------------------------------------

namespace {

int exact_log2(int v, const char* what) {
    if (v < 1 || (v & (v - 1)) != 0)
        throw std::invalid_argument(std::string(what) + " must be a power of two");
    int b = 0;
    while ((1 << b) < v) ++b;
    return b;
}

int perm_field_bits(int L) {
    return BigUint::factorial(L).bit_length() - 1; // floor(log2 L!)
}

} // namespace

int bits_per_waveform(Scheme s, const SchemeParams& p) {
    switch (s) {
        case Scheme::LsfQpsk:
        case Scheme::CostasQpsk:
            return p.L * exact_log2(p.psk_order, "psk_order");
        case Scheme::Perm:
            return perm_field_bits(p.L);
        case Scheme::PermQpsk:
            return perm_field_bits(p.L) + p.L * exact_log2(p.psk_order, "psk_order");
        case Scheme::Fsk:
        case Scheme::FskPslMin:
            return p.L * exact_log2(p.M, "M");
        case Scheme::FskQpsk:
            return p.L * (exact_log2(p.M, "M") + exact_log2(p.psk_order, "psk_order"));
    }
    throw std::invalid_argument("bits_per_waveform: bad scheme");
}

double bits_per_subpulse(Scheme s, const SchemeParams& p) {
    return static_cast<double>(bits_per_waveform(s, p)) / p.L;
}

int binary_to_gray(int b) { return b ^ (b >> 1); }

int gray_to_binary(int g) {
    int b = 0;
    for (; g; g >>= 1) b ^= g;
    return b;
}

double psk_phase(int index, int order) {
    return kTwoPi * index / order;
}

namespace {

// Field layouts (MSB-first everywhere):
//   LSF/COSTAS_QPSK : L blocks of log2(order) phase bits.
//   PERM            : floor(log2 L!) permutation-rank bits.
//   PERM_QPSK       : rank bits, then L blocks of phase bits.
//   FSK(+PSLMIN)    : L blocks of log2(M) tone bits.
//   FSK_QPSK        : L blocks of tone bits, then L blocks of phase bits.

int read_field(const DataBits& bits, int& pos, int n) {
    int v = 0;
    for (int i = 0; i < n; ++i) v = (v << 1) | bits[pos++];
    return v;
}

void write_field(DataBits& bits, int& pos, int v, int n) {
    for (int i = n - 1; i >= 0; --i) bits[pos++] = static_cast<std::uint8_t>((v >> i) & 1);
}

PhaseSequence psk_block_decode(const DataBits& bits, int& pos, int L, int order) {
    const int nb = exact_log2(order, "psk_order");
    PhaseSequence ph;
    ph.phases.resize(L);
    for (int l = 0; l < L; ++l)
        ph.phases[l] = psk_phase(gray_to_binary(read_field(bits, pos, nb)), order);
    return ph;
}

int phase_to_psk_index(double phase, int order) {
    double step = kTwoPi / order;
    int idx = static_cast<int>(std::lround(phase / step)) % order;
    if (idx < 0) idx += order;
    if (std::abs(std::remainder(phase - idx * step, kTwoPi)) > 1e-6)
        throw std::invalid_argument("decode_map: phase is not a constellation point");
    return idx;
}

} // namespace

std::pair<FrequencySequence, PhaseSequence>
encode(Scheme s, const DataBits& bits, const SchemeParams& p,
       const PhaseProvider* pslmin_phases) {
    const int want = bits_per_waveform(s, p);
    if (static_cast<int>(bits.size()) != want)
        throw std::invalid_argument("encode: expected " + std::to_string(want) +
                                    " bits, got " + std::to_string(bits.size()));
    int pos = 0;
    switch (s) {
        case Scheme::LsfQpsk:
            return {lsf_sequence(p.L), psk_block_decode(bits, pos, p.L, p.psk_order)};
        case Scheme::CostasQpsk:
            return {costas_sequence(p.L), psk_block_decode(bits, pos, p.L, p.psk_order)};
        case Scheme::Perm:
        case Scheme::PermQpsk: {
            const int nb = perm_field_bits(p.L);
            BigUint k = BigUint::from_bits_msb(bits.data(), nb);
            if (k.compare(BigUint::factorial(p.L)) >= 0)
                throw std::invalid_argument("encode: permutation field out of range");
            FrequencySequence freq = perm_unrank(k, p.L);
            pos = nb;
            PhaseSequence ph = (s == Scheme::PermQpsk)
                                   ? psk_block_decode(bits, pos, p.L, p.psk_order)
                                   : PhaseSequence::zeros(p.L);
            return {std::move(freq), std::move(ph)};
        }
        case Scheme::Fsk:
        case Scheme::FskPslMin:
        case Scheme::FskQpsk: {
            const int nf = exact_log2(p.M, "M");
            FrequencySequence freq;
            freq.indices.resize(p.L);
            for (int l = 0; l < p.L; ++l) freq.indices[l] = read_field(bits, pos, nf);
            if (s == Scheme::FskQpsk)
                return {std::move(freq), psk_block_decode(bits, pos, p.L, p.psk_order)};
            if (s == Scheme::FskPslMin) {
                if (!pslmin_phases)
                    throw std::invalid_argument("encode: FSK_PSLMIN needs a phase provider");
                PhaseSequence ph = (*pslmin_phases)(freq);
                if (ph.size() != p.L)
                    throw std::invalid_argument("encode: phase provider length mismatch");
                return {std::move(freq), std::move(ph)};
            }
            return {std::move(freq), PhaseSequence::zeros(p.L)};
        }
    }
    throw std::invalid_argument("encode: bad scheme");
}

DataBits symbols_to_bits(Scheme s, const FrequencySequence& freq,
                         const std::vector<int>& psk_indices,
                         const SchemeParams& p) {
    DataBits bits(bits_per_waveform(s, p));
    int pos = 0;
    auto write_psk = [&] {
        const int nb = exact_log2(p.psk_order, "psk_order");
        for (int l = 0; l < p.L; ++l)
            write_field(bits, pos, binary_to_gray(psk_indices[l]), nb);
    };
    switch (s) {
        case Scheme::LsfQpsk:
        case Scheme::CostasQpsk:
            if (static_cast<int>(psk_indices.size()) != p.L)
                throw std::invalid_argument("symbols_to_bits: need L PSK indices");
            write_psk();
            return bits;
        case Scheme::Perm:
        case Scheme::PermQpsk: {
            const int nb = perm_field_bits(p.L);
            BigUint k = perm_rank(freq);
            if (k.bit_length() > nb)
                throw std::invalid_argument("symbols_to_bits: permutation outside the code space");
            auto field = k.to_bits_msb(nb);
            std::copy(field.begin(), field.end(), bits.begin());
            pos = nb;
            if (s == Scheme::PermQpsk) {
                if (static_cast<int>(psk_indices.size()) != p.L)
                    throw std::invalid_argument("symbols_to_bits: need L PSK indices");
                write_psk();
            }
            return bits;
        }
        case Scheme::Fsk:
        case Scheme::FskPslMin:
        case Scheme::FskQpsk: {
            const int nf = exact_log2(p.M, "M");
            for (int l = 0; l < p.L; ++l) {
                int c = freq.indices[l];
                if (c < 0 || c >= p.M)
                    throw std::invalid_argument("symbols_to_bits: tone index out of range");
                write_field(bits, pos, c, nf);
            }
            if (s == Scheme::FskQpsk) {
                if (static_cast<int>(psk_indices.size()) != p.L)
                    throw std::invalid_argument("symbols_to_bits: need L PSK indices");
                write_psk();
            }
            return bits;
        }
    }
    throw std::invalid_argument("symbols_to_bits: bad scheme");
}

DataBits decode_map(Scheme s, const FrequencySequence& freq,
                    const PhaseSequence& phase, const SchemeParams& p) {
    if (freq.size() != p.L)
        throw std::invalid_argument("decode_map: frequency length mismatch");
    std::vector<int> psk;
    const bool has_psk =
        s == Scheme::LsfQpsk || s == Scheme::CostasQpsk || s == Scheme::PermQpsk || s == Scheme::FskQpsk;
    if (has_psk) {
        if (phase.size() != p.L)
            throw std::invalid_argument("decode_map: phase length mismatch");
        psk.resize(p.L);
        for (int l = 0; l < p.L; ++l)
            psk[l] = phase_to_psk_index(phase.phases[l], p.psk_order);
    }
    return symbols_to_bits(s, freq, psk, p);
}

} // namespace cmisac
