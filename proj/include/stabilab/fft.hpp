#pragma once

#include <cmath>
#include <map>
#include <vector>

#include "errors.hpp"
#include "util.hpp"

namespace stabilab::fft {

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Twiddle table exp(-2*pi*i*k/n) for k < n/2, cached per size.  Entries come
// straight from polar so no accumulated recurrence error enters the transform.
inline const std::vector<cd>& twiddles(int n) {
    thread_local std::map<int, std::vector<cd>> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<cd> tw(n / 2);
    for (int k = 0; k < n / 2; ++k) tw[k] = std::polar(1.0, -2.0 * M_PI * k / n);
    return cache.emplace(n, std::move(tw)).first->second;
}

// In-place radix-2, unnormalized: forward uses kernel exp(-2*pi*i*jk/n),
// inverse exp(+2*pi*i*jk/n).  Callers own the normalization convention.
inline void transform(cd* a, int n, bool inverse) {
    if (n == 1) return;
    if (!is_pow2(n)) throw PreconditionError("transform length must be a power of two");
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const auto& tw = twiddles(n);
    for (int len = 2; len <= n; len <<= 1) {
        const int step = n / len;
        for (int i = 0; i < n; i += len) {
            for (int k = 0; k < len / 2; ++k) {
                const cd w = inverse ? std::conj(tw[k * step]) : tw[k * step];
                const cd u = a[i + k];
                const cd v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
        }
    }
}

// Axis-wise transform of a d-dimensional row-major array with equal extent n
// per axis.  Lines are gathered into a scratch buffer so the 1-d kernel stays
// stride-free.
inline void transform_nd(std::vector<cd>& data, int d, int n, bool inverse) {
    std::vector<cd> line(n);
    long total = 1;
    for (int i = 0; i < d; ++i) total *= n;
    for (int axis = 0; axis < d; ++axis) {
        long stride = 1;
        for (int i = axis + 1; i < d; ++i) stride *= n;
        const long block = stride * n;
        for (long base = 0; base < total; base += block) {
            for (long off = 0; off < stride; ++off) {
                for (int k = 0; k < n; ++k) line[k] = data[base + off + k * stride];
                transform(line.data(), n, inverse);
                for (int k = 0; k < n; ++k) data[base + off + k * stride] = line[k];
            }
        }
    }
}

}  // namespace stabilab::fft
