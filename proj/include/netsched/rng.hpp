#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace netsched {

// Deterministic random stream shared by the simulator and model training.
//
// The standard <random> distributions are implementation-defined, so every
// conversion from raw engine output is spelled out here and frozen:
//
//   next_u64()       one mt19937_64 output
//   uniform()        (next_u64() >> 11) * 2^-53, in [0, 1)
//   normal()         Box-Muller; consumes exactly two uniforms, no caching
//   lognormal()      exp(normal())
//   uniform_index(n) floor(uniform() * n), clamped to n-1
//   sample_without_replacement(n, k)
//                    partial Fisher-Yates over {0..n-1}; one uniform_index
//                    per selected element, results in selection order
//
// Seeded runs therefore reproduce bit-for-bit on any conforming platform.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal(double mean, double stddev) {
        const double u1 = 1.0 - uniform(); // (0, 1], keeps log() finite
        const double u2 = uniform();
        const double z = std::sqrt(-2.0 * std::log(u1)) *
                         std::cos(2.0 * std::numbers::pi * u2);
        return mean + stddev * z;
    }

    double lognormal(double mu, double sigma) { return std::exp(normal(mu, sigma)); }

    std::size_t uniform_index(std::size_t n) {
        assert(n > 0);
        const auto k = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return k < n ? k : n - 1;
    }

    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        assert(k <= n);
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        std::vector<std::size_t> picked;
        picked.reserve(k);
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + uniform_index(n - i);
            std::swap(pool[i], pool[j]);
            picked.push_back(pool[i]);
        }
        return picked;
    }

private:
    std::mt19937_64 engine_;
};

// Child seed for tree t, worker w, ... so parallel training is
// order-independent. splitmix64 finalizer over seed + golden-ratio steps.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace netsched
