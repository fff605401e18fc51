#include "abcmc/rng.hpp"

#include <cmath>

#include "abcmc/errors.hpp"

namespace abcmc {

namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed) : seed_(seed), engine_(seeded_engine(seed)) {}

RngStream RngStream::split(std::uint64_t child_index) const {
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(child_index),
                      static_cast<std::uint32_t>(child_index >> 32), 0x5eed5u};
    std::mt19937_64 derive(seq);
    return RngStream(derive());
}

double RngStream::exponential(double rate) {
    if (!(rate > 0.0)) throw DomainError("exponential rate must be positive");
    return -std::log(uniform_open()) / rate;
}

}  // namespace abcmc
