// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "cmisac/types.hpp"

namespace cmisac {

/// In-place iterative radix-2 FFT with a precomputed twiddle table.
///
/// A plan is immutable after construction and safe to share across threads;
/// callers supply their own buffers. Deliberately self-contained so that
/// repeated runs (and any thread count) produce bit-identical output.
class Fft {
public:
    explicit Fft(int n);

    int size() const { return n_; }

    void forward(cplx* data) const { transform(data, false); }
    void inverse(cplx* data) const { transform(data, true); } // scales by 1/n

    void forward(std::vector<cplx>& v) const { forward(v.data()); }
    void inverse(std::vector<cplx>& v) const { inverse(v.data()); }

    static int next_pow2(int n) {
        int p = 1;
        while (p < n) p <<= 1;
        return p;
    }

private:
    void transform(cplx* data, bool inv) const;

    int n_;
    std::vector<int> bitrev_;
    std::vector<cplx> twiddle_; // n/2 roots for the forward direction
};

} // namespace cmisac
