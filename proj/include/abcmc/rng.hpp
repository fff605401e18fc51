#pragma once

#include <cstdint>
#include <random>

namespace abcmc {

/// Seeded uniform stream. Two streams built from the same seed and driven
/// by the same call sequence produce bit-identical output.
///
/// split(k) derives a child stream from the seed alone (not from the
/// current engine position), so chain k of an experiment always sees the
/// same numbers regardless of how many other chains ran before it.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed);

    RngStream split(std::uint64_t child_index) const;

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1).
    double uniform_open() {
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return u;
    }

    bool bernoulli(double p) { return uniform() < p; }

    double exponential(double rate);

    double normal() { return normal_(engine_); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

}  // namespace abcmc
