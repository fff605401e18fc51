#include "abcmc/gaussian_smoothed.hpp"

#include <cmath>
#include <numbers>

#include "abcmc/errors.hpp"

namespace abcmc {

double normal_pdf(double x, double mean, double variance) {
    if (!(variance > 0.0)) throw DomainError("normal_pdf: variance must be positive");
    const double z = x - mean;
    return std::exp(-0.5 * z * z / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

GaussianSmoothedModel::GaussianSmoothedModel(Params params) : p_(params) {
    if (!(p_.sigma > 0.0) || !(p_.lambda_theta > 0.0) || !(p_.lambda_eps > 0.0) || !(p_.hit_tolerance > 0.0)) {
        throw DomainError("gaussian smoothed model: sigma, rates and tolerance must be positive");
    }
}

double GaussianSmoothedModel::prior_density(const ParamPoint& theta) const {
    check_point(theta);
    return 0.5 * p_.lambda_theta * std::exp(-p_.lambda_theta * std::abs(theta.coord(0)));
}

ParamPoint GaussianSmoothedModel::prior_sample(RngStream& rng) const {
    const double mag = rng.exponential(p_.lambda_theta);
    return ParamPoint::real({rng.bernoulli(0.5) ? mag : -mag});
}

PseudoData GaussianSmoothedModel::simulate(const ParamPoint& theta, RngStream& rng) const {
    check_point(theta);
    return {theta.coord(0) + p_.sigma * rng.normal()};
}

bool GaussianSmoothedModel::hit(const PseudoData& x) const {
    return !x.empty() && std::abs(x[0] - p_.y) <= p_.hit_tolerance;
}

double GaussianSmoothedModel::exact_hit_prob(const ParamPoint& theta) const {
    check_point(theta);
    const double s = p_.sigma * std::numbers::sqrt2;
    const double lo = (p_.y - p_.hit_tolerance - theta.coord(0)) / s;
    const double hi = (p_.y + p_.hit_tolerance - theta.coord(0)) / s;
    return 0.5 * (std::erf(hi) - std::erf(lo));
}

double GaussianSmoothedModel::smoothing_kernel(const PseudoData& x, double eps) const {
    if (x.empty()) throw DimensionMismatch("gaussian smoothed model: empty pseudo-data");
    return normal_pdf(p_.y, x[0], eps);
}

double GaussianSmoothedModel::eps_prior_density(double eps) const {
    return eps > 0.0 ? p_.lambda_eps * std::exp(-p_.lambda_eps * eps) : 0.0;
}

}  // namespace abcmc
