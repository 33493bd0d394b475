#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace nisekit::rng {

// Counter-based seed derivation (splitmix64 finalizer). Streams for
// (realization, site) pairs are derived as
//   split_seed(split_seed(base_seed, realization), site)
// which keeps every stream reproducible and independent of scheduling.

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) {
    return mix64(seed ^ mix64(index + 1));
}

// Standard-normal stream with an explicit Box-Muller implementation so the
// output depends only on the mt19937_64 engine (fully specified by the
// standard), not on library-private distribution internals.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform_open();
        double u2 = uniform_open();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    // Uniform on (0, 1]; excludes 0 so log() is finite.
    double uniform_open() {
        const std::uint64_t bits = engine_() >> 11;  // 53 random bits
        return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
    }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace nisekit::rng
