#include "abcmc/compact.hpp"

#include <cmath>

#include "abcmc/acceptance.hpp"
#include "abcmc/errors.hpp"

namespace abcmc {

void CompactExampleSpec::validate() const {
    if (!(a >= 1.0) || !std::isfinite(a)) throw DomainError("compact example: a must be >= 1");
    if (!(b > 0.0 && b <= 1.0)) throw DomainError("compact example: b must lie in (0, 1]");
}

CompactModel::CompactModel(CompactExampleSpec spec) : spec_(spec) { spec_.validate(); }

double CompactModel::prior_density(const ParamPoint& theta) const {
    check_point(theta);
    const double t = theta.coord(0);
    return (t >= 0.0 && t <= spec_.a) ? 1.0 / spec_.a : 0.0;
}

ParamPoint CompactModel::prior_sample(RngStream& rng) const { return ParamPoint::real({spec_.a * rng.uniform()}); }

PseudoData CompactModel::simulate(const ParamPoint& theta, RngStream& rng) const {
    return {rng.uniform() < exact_hit_prob(theta) ? 1.0 : 0.0};
}

double CompactModel::exact_hit_prob(const ParamPoint& theta) const {
    check_point(theta);
    const double t = theta.coord(0);
    return (t >= 0.0 && t <= 1.0) ? spec_.b : 0.0;
}

std::vector<std::pair<std::string, FiniteChain>> compact_two_block_chains(const CompactExampleSpec& spec) {
    spec.validate();
    Eigen::MatrixXd flip(2, 2);
    flip << 0.0, 1.0, 1.0, 0.0;
    const Eigen::Vector2d pi(0.5, 0.5);
    auto states = [] { return std::vector<ParamPoint>{ParamPoint::real({0.25}), ParamPoint::real({0.75})}; };

    // Both blocks have the same prior mass and h, so c-ratio is 1 throughout.
    const double b = spec.b;
    std::vector<std::pair<std::string, FiniteChain>> out;
    out.emplace_back("MH", build_finite_kernel(states(), flip, [b](std::size_t, std::size_t) {
                         return alpha_mh(b, b, 1.0);
                     }, pi));
    out.emplace_back("OneHit", build_finite_kernel(states(), flip, [b](std::size_t, std::size_t) {
                         return alpha_onehit(b, b, 1.0);
                     }, pi));
    return out;
}

double compact_inverse_hit_rate(const CompactExampleSpec& spec) {
    spec.validate();
    return spec.a / spec.b;
}

}  // namespace abcmc
