#pragma once

#include <cassert>
#include <cstdint>
#include <random>

namespace tabrl {

/// Seeded random generator handle. Every sampling operation takes one of
/// these explicitly; algorithms own exactly one per run, which makes runs
/// reproducible from their seed and independent runs safe to parallelize.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1).
    double uniform() {
        return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
    }

    /// Uniform integer in [0, n).
    int uniform_int(int n) {
        assert(n > 0);
        return std::uniform_int_distribution<int>(0, n - 1)(engine_);
    }

    double normal(double mean, double stddev) {
        return std::normal_distribution<double>(mean, stddev)(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
};

} // namespace tabrl
