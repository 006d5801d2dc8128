#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace posture {

// Seeded pseudo-random source. The engine is std::mt19937_64, whose output
// sequence the standard pins down exactly; all distribution transforms are
// done by hand so results never depend on library-specific distribution
// internals. Fitted models and generated datasets must be reproducible
// byte for byte from a seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform over [0, n); rejection sampling, no modulo bias. n >= 1.
    std::size_t uniform_index(std::size_t n) {
        const std::uint64_t range = n;
        const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
        const std::uint64_t limit = max - max % range;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return static_cast<std::size_t>(x % range);
    }

    // Uniform double in (0, 1]; 53 random bits.
    double uniform01() {
        return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Box-Muller; consumes two uniforms per draw.
    double normal(double mean, double stddev) {
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double two_pi = 6.283185307179586476925286766559;
        const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
        return mean + stddev * z;
    }

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[uniform_index(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// Stable child-seed derivation (splitmix64 mix). Fitting N models from one
// master seed must give each model its own stream regardless of the order
// the fits actually run in.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace posture
