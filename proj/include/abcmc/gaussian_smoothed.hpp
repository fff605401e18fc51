#pragma once

#include "abcmc/model.hpp"

namespace abcmc {

/// Toy smoothed-ABC model: f_theta = N(theta, sigma^2), data y, smoothing
/// kernel K_eps(x, y) = N(y; x, eps) with eps a variance, and prior
/// p(theta, eps) = (l1 / 2) exp(-l1 |theta|) * l2 exp(-l2 eps).
/// hit() uses a fixed tolerance so the model can also drive the plain kernels.
class GaussianSmoothedModel final : public SmoothedModel {
public:
    struct Params {
        double sigma = 1.0;
        double y = 0.0;
        double lambda_theta = 1.0;
        double lambda_eps = 1.0;
        double hit_tolerance = 0.5;
    };

    explicit GaussianSmoothedModel(Params params);

    Dimension dimension() const override { return Dimension::reals(1); }
    double prior_density(const ParamPoint& theta) const override;
    bool prior_normalized() const override { return true; }
    bool has_prior_sampler() const override { return true; }
    ParamPoint prior_sample(RngStream& rng) const override;
    PseudoData simulate(const ParamPoint& theta, RngStream& rng) const override;
    bool hit(const PseudoData& x) const override;
    bool has_exact_hit_prob() const override { return true; }
    double exact_hit_prob(const ParamPoint& theta) const override;

    double smoothing_kernel(const PseudoData& x, double eps) const override;
    double eps_prior_density(double eps) const override;

    const Params& params() const { return p_; }

private:
    Params p_;
};

/// Normal density with the given mean and variance.
double normal_pdf(double x, double mean, double variance);

}  // namespace abcmc
