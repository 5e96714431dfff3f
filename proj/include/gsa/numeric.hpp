#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace gsa {

// Kahan compensated accumulator. All estimator reductions use it in a
// fixed index order so results do not depend on the worker count.
struct KahanAccumulator {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

inline double kahan_sum(std::span<const double> v) {
    KahanAccumulator acc;
    for (double x : v) acc.add(x);
    return acc.sum;
}

inline double kahan_dot(std::span<const double> a, std::span<const double> b) {
    KahanAccumulator acc;
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) acc.add(a[i] * b[i]);
    return acc.sum;
}

// FNV-1a, used to stamp output files with a hash of the config they came from.
inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace gsa
