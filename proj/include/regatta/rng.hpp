#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace regatta {

// Deterministic 64-bit generator (splitmix64). All stochastic behavior in the
// toolkit flows through this class so runs are reproducible across platforms
// and standard libraries; std::normal_distribution et al. are implementation
// defined and deliberately avoided.
class Rng {
   public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n). n must be >= 1.
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    // Bernoulli(p).
    bool chance(double p) { return next_unit() < p; }

    // Gaussian via Box-Muller; consumes exactly two uniforms per call.
    double normal(double mean, double stddev) {
        double u1 = next_unit();
        double u2 = next_unit();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
        return mean + stddev * z;
    }

   private:
    std::uint64_t state_;
};

// Stateless seed derivation: one master seed expands into independent
// per-subsystem streams. `stream` names the consumer, `index` the item.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index = 0) {
    auto mix = [](std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    };
    return mix(mix(master ^ (stream * 0x9E3779B97F4A7C15ull)) + index * 0xD1B54A32D192ED03ull);
}

}  // namespace regatta
