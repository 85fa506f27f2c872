#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace fbnll {

// Deterministic randomness utilities. std::mt19937_64 is bit-exact across
// platforms, but the standard distributions are not, so every draw used by the
// library goes through the helpers below. Sub-streams are derived with
// splitmix64 so per-user / per-round work stays independent of ordering.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derive a sub-seed from a base seed and one or more stream tags.
template <typename... Tags>
std::uint64_t derive_seed(std::uint64_t seed, Tags... tags) {
    ((seed = splitmix64(seed ^ static_cast<std::uint64_t>(tags))), ...);
    return seed;
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

/// Stream tags keeping the seeded sub-streams of different stages disjoint.
enum class Stream : std::uint64_t {
    validation_split = 0x101,
    partition = 0x102,
    test_split = 0x103,
    noise = 0x104,
    synthetic = 0x105,
    model_init = 0x106,
    local_train = 0x107,
    ifca_init = 0x108,
};

/// Uniform integer in [0, n) via rejection sampling (no modulo bias).
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = rng();
    while (x >= limit) x = rng();
    return static_cast<std::size_t>(x % n);
}

/// Uniform double in [0, 1) with 53-bit resolution.
inline double uniform_real(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller (avoids std::normal_distribution, which is
/// implementation-defined).
inline double gaussian(std::mt19937_64& rng) {
    double u1 = uniform_real(rng);
    while (u1 <= 0.0) u1 = uniform_real(rng);
    const double u2 = uniform_real(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// In-place Fisher-Yates shuffle.
template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = uniform_index(rng, i);
        std::swap(v[i - 1], v[j]);
    }
}

/// First `count` elements of a shuffled copy of [0, n): a seeded sample
/// without replacement.
inline std::vector<std::size_t> sample_without_replacement(std::mt19937_64& rng, std::size_t n,
                                                           std::size_t count) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    shuffle(idx, rng);
    idx.resize(count <= n ? count : n);
    return idx;
}

}  // namespace fbnll
