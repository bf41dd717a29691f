#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

#include "avatarkit/image.hpp"

namespace avatarkit {

/// splitmix64. Small, seedable, identical output on every platform.
struct SplitMix64 {
    uint64_t state;

    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in (0, 1].
    double uniform01() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }
};

/// Standard normal draws via Box-Muller on splitmix64.
/// std::normal_distribution is implementation-defined, which would break
/// byte-identical golden files across standard libraries.
class GaussianRng {
public:
    explicit GaussianRng(uint64_t seed) : rng_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = rng_.uniform01();
        double u2 = rng_.uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double uniform01() { return rng_.uniform01(); }

    Image image(int width, int height) {
        Image out(width, height);
        for (double& v : out.values()) v = next();
        return out;
    }

    Image uniform_image(int width, int height) {
        Image out(width, height);
        for (double& v : out.values()) v = rng_.uniform01();
        return out;
    }

private:
    SplitMix64 rng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

inline uint64_t fnv1a64(std::string_view text) {
    uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline uint64_t fnv1a64_bytes(const void* data, size_t n, uint64_t h = 0xCBF29CE484222325ULL) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace avatarkit
