#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace repack {

// Seeded RNG with derivations that do not depend on libstdc++ internals, so
// seeded fixtures stay stable across toolchains. mt19937_64 output is
// standard-defined; only the raw engine is used.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        // Multiply-shift; bias is negligible for the small n used here.
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(gen_()) * n) >> 64);
    }

    bool chance(double p) { return uniform() < p; }

    // Standard normal via Box-Muller (spare cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    // exp(location + scale * Z), Z ~ N(0,1).
    double lognormal(double location, double scale) {
        if (scale == 0.0) return std::exp(location);
        return std::exp(location + scale * normal());
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace repack
