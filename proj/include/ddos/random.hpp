#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace ddos {

/// Seeded generator with distribution code written out explicitly, so a
/// given seed yields the same stream under every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer on [0, n). Requires n > 0.
    std::uint64_t index(std::uint64_t n);

    /// Standard normal via Box-Muller (both variates are used).
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Exponential with the given rate.
    double exponential(double rate);

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace ddos
