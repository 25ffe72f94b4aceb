#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <string_view>

#include "argo/util.hpp"

namespace argo {

// Deterministic splitmix64 stream. Substreams are derived by hashing a key
// tuple, so draws are independent of generation order and thread layout.
class Rng {
public:
    explicit Rng(std::uint64_t key) : state_(key) {}

    static std::uint64_t derive_key(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> parts) {
        std::uint64_t h = mix(seed ^ 0x9e3779b97f4a7c15ull);
        for (std::uint64_t p : parts) h = mix(h ^ mix(p));
        return h;
    }
    static std::uint64_t hash_str(std::string_view s) { return fnv1a(s); }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi] inclusive.
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
        std::uint64_t span = hi - lo + 1;
        // Rejection sampling keeps the distribution exact.
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return lo + v % span;
    }

    /// Standard normal via Box-Muller (cosine branch only, for determinism).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

}  // namespace argo
