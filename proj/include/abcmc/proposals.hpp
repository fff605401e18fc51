#pragma once

#include <vector>

#include "abcmc/model.hpp"

namespace abcmc {

/// Moves an integer parameter to theta - 1 or theta + 1 with probability
/// one half each. Targets outside the prior support are left to the
/// acceptance step.
class NeighbourWalk final : public Proposal {
public:
    ParamPoint sample(const ParamPoint& from, RngStream& rng) const override;
    double density(const ParamPoint& from, const ParamPoint& to) const override;
    bool symmetric() const override { return true; }
};

/// Independent Gaussian increments with per-coordinate standard deviations.
/// A zero standard deviation freezes that coordinate.
class GaussianRandomWalk final : public Proposal {
public:
    explicit GaussianRandomWalk(std::vector<double> step_sd);

    ParamPoint sample(const ParamPoint& from, RngStream& rng) const override;
    double density(const ParamPoint& from, const ParamPoint& to) const override;
    bool symmetric() const override { return true; }

    const std::vector<double>& step_sd() const { return sd_; }

private:
    std::vector<double> sd_;
};

/// Uniform jump between the blocks [0, 1/2] and (1/2, 1]:
/// q(t, v) = 2 I(t <= 1/2) I(1/2 < v <= 1) + 2 I(1/2 < t <= 1) I(v <= 1/2).
class TwoBlockFlip final : public Proposal {
public:
    ParamPoint sample(const ParamPoint& from, RngStream& rng) const override;
    double density(const ParamPoint& from, const ParamPoint& to) const override;
    bool symmetric() const override { return true; }
};

/// log(eps') = log(eps) + scale * Z. Density includes the 1/eps' Jacobian,
/// so g(eps', eps) / g(eps, eps') = eps' / eps.
class LogScaleEpsWalk final : public EpsProposal {
public:
    explicit LogScaleEpsWalk(double scale);
    double sample(double eps, RngStream& rng) const override;
    double density(double from, double to) const override;

private:
    double scale_;
};

/// eps' = |eps + scale * Z|; symmetric in (eps, eps').
class ReflectedEpsWalk final : public EpsProposal {
public:
    explicit ReflectedEpsWalk(double scale);
    double sample(double eps, RngStream& rng) const override;
    double density(double from, double to) const override;

private:
    double scale_;
};

}  // namespace abcmc
