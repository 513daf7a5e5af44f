#pragma once

#include <cmath>
#include <cstdint>

// Counter-based randomness. Every random quantity in the library is a pure
// function of (seed, key...), so samples are reproducible bit-for-bit and
// independent of evaluation order. In particular the edge draw for a node
// pair (i,j) depends only on the seed and the unordered pair, which makes
// homogeneous and heterogeneous SBM generation coincide when the parameters
// coincide.

namespace sbmsdp::rng {

inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix3(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return mix64(mix64(mix64(seed) ^ a) ^ b);
}

// Uniform in [0,1) with 53 bits of precision.
inline double u01(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// One uniform per unordered node pair (order of arguments irrelevant).
inline double pair_u01(std::uint64_t seed, int i, int j) {
    const std::uint64_t a = static_cast<std::uint64_t>(i < j ? i : j);
    const std::uint64_t b = static_cast<std::uint64_t>(i < j ? j : i);
    return u01(mix3(seed, a + 1, b + 1));
}

// Keyed stream: draw t for key k under the given seed.
inline double keyed_u01(std::uint64_t seed, std::uint64_t key, std::uint64_t t) {
    return u01(mix3(seed, key, t));
}

// Small sequential generator for test helpers and jitter-style draws.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : state_(mix64(seed ^ 0x5851f42d4c957f2dULL)) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    double next_u01() { return u01(next_u64()); }

    // Marsaglia polar method.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * next_u01() - 1.0;
            v = 2.0 * next_u01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace sbmsdp::rng
