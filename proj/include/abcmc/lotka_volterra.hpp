#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "abcmc/estimators.hpp"
#include "abcmc/model.hpp"

namespace abcmc {

struct LVParams {
    double theta1 = 0.0;  // prey birth
    double theta2 = 0.0;  // prey consumption
    double theta3 = 0.0;  // predator death

    static LVParams from_point(const ParamPoint& p);
    ParamPoint to_point() const { return ParamPoint::real({theta1, theta2, theta3}); }
};

inline constexpr std::size_t kLVObservations = 10;
inline constexpr std::array<std::int64_t, kLVObservations> kLVData{88, 165, 274, 268, 114, 46, 32, 36, 53, 92};

struct LVPath {
    /// X1 at times 1..10.
    std::array<std::int64_t, kLVObservations> x1{};
    std::uint64_t event_count = 0;
    bool truncated = false;
};

enum class LVPrior { Prior1, Prior2 };

struct LVExperimentConfig {
    LVPrior prior = LVPrior::Prior1;
    std::array<double, 3> step_sd{0.5, 0.05, 0.5};
    double eps = 1.0;
    std::array<std::int64_t, 2> x0{50, 100};
    /// Observations are taken at 1, ..., horizon.
    int horizon = 10;
    std::uint64_t event_cap = 10'000'000;
    std::uint64_t race_cap = 100'000'000;
    LVParams theta0{1.0, 0.005, 0.6};

    /// Throws DomainError on eps <= 0, event_cap < 1e5, negative sd or horizon != 10.
    void validate() const;
};

/// One event of an instrumented simulation.
struct LVEvent {
    int reaction = 0;  // 1, 2 or 3
    std::array<std::int64_t, 2> before{};
    std::array<std::int64_t, 2> after{};
};

/// Gillespie simulation on [0, horizon]. When events is non-null every
/// event is appended to it.
LVPath gillespie_simulate(const LVParams& theta, const LVExperimentConfig& config, RngStream& rng,
                          std::vector<LVEvent>* events = nullptr);

/// |log X1(i) - log y(i)| <= eps at every observation. Truncated paths and
/// zero counts are misses.
bool lv_hit(const LVPath& path, double eps);

/// Same law as lv_hit(gillespie_simulate(...)), stopping at the first
/// failed observation.
bool gillespie_simulate_hit(const LVParams& theta, const LVExperimentConfig& config, RngStream& rng);

/// Tau-leaping approximation (Poisson increments on a fixed step), used as
/// an independent reference for the exact simulator.
LVPath tau_leap_simulate(const LVParams& theta, const LVExperimentConfig& config, RngStream& rng, double tau);

class LotkaVolterraModel final : public GenerativeModel {
public:
    explicit LotkaVolterraModel(LVExperimentConfig config);

    Dimension dimension() const override { return Dimension::reals(3); }
    double prior_density(const ParamPoint& theta) const override;
    bool prior_normalized() const override { return true; }
    bool has_prior_sampler() const override { return true; }
    ParamPoint prior_sample(RngStream& rng) const override;
    /// Pseudo-data is X1 at the observation times followed by a truncation flag.
    PseudoData simulate(const ParamPoint& theta, RngStream& rng) const override;
    bool hit(const PseudoData& x) const override;
    bool simulate_hit(const ParamPoint& theta, RngStream& rng) const override;

    const LVExperimentConfig& config() const { return config_; }

private:
    LVExperimentConfig config_;
    std::array<double, 3> rates_;
};

/// Exponential rates of the independent prior coordinates.
std::array<double, 3> lv_prior_rates(LVPrior prior);

enum class LVKernelKind { PM1, PM2, OneHit };

struct LVKernelChoice {
    LVKernelKind kind = LVKernelKind::OneHit;
    std::size_t n = 0;

    /// "PM1(1)", "PM1(15)", "PM2(15)", "OneHit".
    std::string label() const;
};

/// Parses the labels above (any N >= 1).
LVKernelChoice parse_lv_kernel(const std::string& text);

struct LVExperimentResult {
    ChainTrace trace;
    /// iteration, theta1..3, accepted, sims_used and running estimates.
    std::string csv;
};

LVExperimentResult lv_experiment(const LVExperimentConfig& config, const LVKernelChoice& kernel,
                                 std::size_t iterations, RngStream& rng);

}  // namespace abcmc
