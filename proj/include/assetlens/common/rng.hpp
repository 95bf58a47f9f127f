#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace assetlens {

// Deterministic PRNG used everywhere in the project. We do not use the
// <random> distributions because their output sequences are
// implementation-defined; every draw here is pinned down by the standard
// splitmix64/xoshiro-style arithmetic below, so a seed reproduces the same
// stream on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        // Warm up so that small seeds do not yield near-zero first outputs.
        next_u64();
        next_u64();
    }

    std::uint64_t next_u64() {
        // splitmix64 step.
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform integer in [0, n), n >= 1. Modulo bias is below 2^-53 for the
    // ranges used here.
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    // Uniform double in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller (one value per call; the mate is cached).
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    double next_gaussian(double mean, double stddev) {
        return mean + stddev * next_gaussian();
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.empty()) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(next_below(i + 1));
            std::swap(v[i], v[j]);
        }
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Labeled subseed derivation: one top-level seed fans out to independent
// component streams ("train", "split", "synth.images", ...).
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
    for (char c : label) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ULL;  // FNV-1a
    }
    // Final splitmix64 avalanche.
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
    return h ^ (h >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label,
                                 std::uint64_t index) {
    return derive_seed(derive_seed(seed, label) ^ (index * 0x9e3779b97f4a7c15ULL),
                       "idx");
}

}  // namespace assetlens
