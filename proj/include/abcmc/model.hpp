#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "abcmc/rng.hpp"

namespace abcmc {

/// Densities below this are treated as exactly zero.
inline constexpr double kDensityFloor = 1e-300;

inline double floor_density(double v) { return v < kDensityFloor ? 0.0 : v; }

/// Shape of a parameter space: either a subset of the integers or R^d.
struct Dimension {
    bool integer = false;
    std::size_t size = 1;

    static Dimension integers() { return {true, 1}; }
    static Dimension reals(std::size_t d) { return {false, d}; }

    friend bool operator==(const Dimension&, const Dimension&) = default;
};

/// A point of the parameter space.
class ParamPoint {
public:
    ParamPoint() : value_(std::int64_t{0}) {}

    static ParamPoint integer(std::int64_t v) { return ParamPoint(Storage(v)); }
    static ParamPoint real(std::vector<double> coords) { return ParamPoint(Storage(std::move(coords))); }

    bool is_integer() const { return std::holds_alternative<std::int64_t>(value_); }
    std::int64_t as_integer() const;
    std::span<const double> coords() const;
    double coord(std::size_t i) const { return coords()[i]; }

    Dimension dimension() const;

    std::string to_string() const;

    friend bool operator==(const ParamPoint&, const ParamPoint&) = default;

private:
    using Storage = std::variant<std::int64_t, std::vector<double>>;
    explicit ParamPoint(Storage s) : value_(std::move(s)) {}
    Storage value_;
};

/// Draw from a likelihood f_theta. Only the model that produced it looks
/// inside; kernels pass it around and ask the model whether it hit.
using PseudoData = std::vector<double>;

/// Prior, simulator and hit predicate of a likelihood-free model.
///
/// Implementations must be safe to share read-only between chains; all
/// randomness comes from the RngStream argument.
class GenerativeModel {
public:
    virtual ~GenerativeModel() = default;

    virtual Dimension dimension() const = 0;

    /// Possibly unnormalized; prior_normalized() says which.
    virtual double prior_density(const ParamPoint& theta) const = 0;
    virtual bool prior_normalized() const { return false; }

    virtual bool has_prior_sampler() const { return false; }
    virtual ParamPoint prior_sample(RngStream& rng) const;

    virtual PseudoData simulate(const ParamPoint& theta, RngStream& rng) const = 0;

    /// w(x): whether the pseudo-data lands in the tolerance ball around y.
    virtual bool hit(const PseudoData& x) const = 0;

    /// hit(simulate(theta)). Models may override with an early-exit
    /// simulator as long as the law of the returned flag is unchanged.
    virtual bool simulate_hit(const ParamPoint& theta, RngStream& rng) const {
        return hit(simulate(theta, rng));
    }

    virtual bool has_exact_hit_prob() const { return false; }
    /// h(theta) in [0, 1]; only meaningful when has_exact_hit_prob().
    virtual double exact_hit_prob(const ParamPoint& theta) const;

    /// Throws DimensionMismatch when theta does not belong to this model.
    void check_point(const ParamPoint& theta) const;
};

/// Model whose pseudo-data is additionally scored by a smoothing kernel
/// K_eps(x, y) > 0, with eps carried in the chain state.
class SmoothedModel : public GenerativeModel {
public:
    virtual double smoothing_kernel(const PseudoData& x, double eps) const = 0;
    virtual double eps_prior_density(double eps) const = 0;
};

/// Proposal q(theta, .).
class Proposal {
public:
    virtual ~Proposal() = default;
    virtual ParamPoint sample(const ParamPoint& from, RngStream& rng) const = 0;
    virtual double density(const ParamPoint& from, const ParamPoint& to) const = 0;
    virtual bool symmetric() const = 0;
};

/// Proposal g(eps, .) on (0, inf) for the eps-augmented kernel.
class EpsProposal {
public:
    virtual ~EpsProposal() = default;
    virtual double sample(double eps, RngStream& rng) const = 0;
    virtual double density(double from, double to) const = 0;
};

/// Model assembled from callables; handy for tests and toy problems.
class LambdaModel : public GenerativeModel {
public:
    struct Parts {
        Dimension dimension = Dimension::integers();
        std::function<double(const ParamPoint&)> prior_density;
        std::function<PseudoData(const ParamPoint&, RngStream&)> simulate;
        std::function<bool(const PseudoData&)> hit;
        std::function<ParamPoint(RngStream&)> prior_sample;            // optional
        std::function<double(const ParamPoint&)> exact_hit_prob;       // optional
        bool prior_normalized = false;
    };

    explicit LambdaModel(Parts parts);

    Dimension dimension() const override { return parts_.dimension; }
    double prior_density(const ParamPoint& theta) const override;
    bool prior_normalized() const override { return parts_.prior_normalized; }
    bool has_prior_sampler() const override { return static_cast<bool>(parts_.prior_sample); }
    ParamPoint prior_sample(RngStream& rng) const override;
    PseudoData simulate(const ParamPoint& theta, RngStream& rng) const override;
    bool hit(const PseudoData& x) const override { return parts_.hit(x); }
    bool has_exact_hit_prob() const override { return static_cast<bool>(parts_.exact_hit_prob); }
    double exact_hit_prob(const ParamPoint& theta) const override;

private:
    Parts parts_;
};

struct HitEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo estimate of h(theta) from n_sims independent simulations,
/// with its binomial standard error.
HitEstimate hit_probability_mc(const GenerativeModel& model, const ParamPoint& theta,
                               std::uint64_t n_sims, RngStream& rng);

}  // namespace abcmc
