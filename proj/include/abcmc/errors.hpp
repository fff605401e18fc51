#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace abcmc {

/// Base of every error raised by the library. Chain drivers attach the
/// iteration index at which a kernel failed before rethrowing.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}

    void set_iteration(std::uint64_t i) { iteration_ = i; }
    std::optional<std::uint64_t> iteration() const { return iteration_; }

private:
    std::optional<std::uint64_t> iteration_;
};

#define ABCMC_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                    \
    public:                                                        \
        explicit Name(const std::string& what) : Error(what) {}    \
    };

ABCMC_DEFINE_ERROR(DomainError)
ABCMC_DEFINE_ERROR(DimensionMismatch)
ABCMC_DEFINE_ERROR(Unsupported)
ABCMC_DEFINE_ERROR(MissingExactH)
ABCMC_DEFINE_ERROR(DegenerateState)
ABCMC_DEFINE_ERROR(RaceCapExceeded)
ABCMC_DEFINE_ERROR(InitializationFailed)
ABCMC_DEFINE_ERROR(WeightSumError)
ABCMC_DEFINE_ERROR(NotReversible)
ABCMC_DEFINE_ERROR(NotStationary)
ABCMC_DEFINE_ERROR(EigenFailure)
ABCMC_DEFINE_ERROR(SingularFundamentalMatrix)
ABCMC_DEFINE_ERROR(TooManyStates)
ABCMC_DEFINE_ERROR(StateMismatch)
ABCMC_DEFINE_ERROR(IoError)

#undef ABCMC_DEFINE_ERROR

/// Invalid configuration; field() names the offending key ("section.key").
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what) : Error(what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

}  // namespace abcmc
