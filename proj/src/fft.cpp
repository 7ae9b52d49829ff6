// SPDX-License-Identifier: Apache-2.0
#include "cmisac/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace cmisac {

Fft::Fft(int n) : n_(n) {
    if (n < 1 || (n & (n - 1)) != 0)
        throw std::invalid_argument("Fft: size must be a power of two");
    bitrev_.resize(n);
    int log2n = 0;
    while ((1 << log2n) < n) ++log2n;
    for (int i = 0; i < n; ++i) {
        int r = 0;
        for (int b = 0; b < log2n; ++b)
            if (i & (1 << b)) r |= 1 << (log2n - 1 - b);
        bitrev_[i] = r;
    }
    twiddle_.resize(n / 2);
    for (int k = 0; k < n / 2; ++k) {
        double a = -kTwoPi * k / n;
        twiddle_[k] = cplx(std::cos(a), std::sin(a));
    }
}

void Fft::transform(cplx* data, bool inv) const {
    for (int i = 0; i < n_; ++i) {
        int j = bitrev_[i];
        if (i < j) std::swap(data[i], data[j]);
    }
    for (int len = 2; len <= n_; len <<= 1) {
        int half = len >> 1;
        int step = n_ / len;
        for (int base = 0; base < n_; base += len) {
            for (int k = 0; k < half; ++k) {
                cplx w = twiddle_[k * step];
                if (inv) w = std::conj(w);
                cplx u = data[base + k];
                cplx v = data[base + k + half] * w;
                data[base + k] = u + v;
                data[base + k + half] = u - v;
            }
        }
    }
    if (inv) {
        double s = 1.0 / n_;
        for (int i = 0; i < n_; ++i) data[i] *= s;
    }
}

} // namespace cmisac
