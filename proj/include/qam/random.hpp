#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace qam {

/// Seeded pseudo-random stream. Streams are derived from a base seed and a
/// tuple of counters, so work items can run in any order without sharing
/// generator state.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    /// Stream for the counter tuple (base_seed, keys...).
    static RandomStream derive(std::uint64_t base_seed, std::initializer_list<std::uint64_t> keys);

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    double normal(double mean, double stddev) {
        return std::normal_distribution<double>(mean, stddev)(engine_);
    }

    bool bernoulli(double probability) {
        return std::bernoulli_distribution(probability)(engine_);
    }

    /// Uniform integer on [0, bound).
    std::uint64_t below(std::uint64_t bound) {
        return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_);
    }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace qam
