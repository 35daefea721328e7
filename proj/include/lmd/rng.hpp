#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace lmd {

// All randomness flows through one generator type so that a fixed seed yields
// bit-identical runs. The helpers below avoid std::uniform_real_distribution,
// whose output is not pinned by the standard.
using Rng = std::mt19937_64;

// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform in [lo, hi).
inline double uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

// Fisher-Yates shuffle with an explicit generator (std::shuffle's sequence of
// draws is implementation defined).
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace lmd
