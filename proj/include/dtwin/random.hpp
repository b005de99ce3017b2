#pragma once

#include <cstdint>
#include <random>

namespace dtwin {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Derived seeds are splitmix64(base ^ splitmix64(stream + 1)),
/// so per-trial, per-record and per-tree streams never depend on evaluation order.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(base ^ splitmix64(stream + 1));
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

inline double gaussian(Rng& rng, double sigma) {
    return sigma == 0.0 ? 0.0 : std::normal_distribution<double>(0.0, sigma)(rng);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace dtwin
