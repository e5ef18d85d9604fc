#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace tunesel {

// SplitMix64 finalizer. Used to derive independent sub-stream seeds from a
// single master seed so that parallel work is reproducible regardless of
// worker count.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a = 0,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = mix64(master);
    s = mix64(s ^ mix64(a ^ 0x1ULL));
    s = mix64(s ^ mix64(b ^ 0x2ULL));
    s = mix64(s ^ mix64(c ^ 0x3ULL));
    return s;
}

inline std::mt19937_64 make_engine(std::uint64_t master, std::uint64_t a = 0,
                                   std::uint64_t b = 0, std::uint64_t c = 0) {
    return std::mt19937_64(derive_seed(master, a, b, c));
}

// Shuffles {0..n-1} and deals consecutive blocks whose sizes differ by at
// most one; each block comes back sorted.
inline std::vector<std::vector<int>> random_partition(int n, int folds,
                                                      std::uint64_t seed) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    auto engine = make_engine(seed, 0x666f6c64ULL); // "fold"
    std::shuffle(order.begin(), order.end(), engine);
    std::vector<std::vector<int>> part(static_cast<std::size_t>(folds));
    const int base = n / folds;
    const int extra = n % folds;
    int pos = 0;
    for (int v = 0; v < folds; ++v) {
        const int size = base + (v < extra ? 1 : 0);
        auto& fold = part[static_cast<std::size_t>(v)];
        fold.assign(order.begin() + pos, order.begin() + pos + size);
        std::sort(fold.begin(), fold.end());
        pos += size;
    }
    return part;
}

} // namespace tunesel
