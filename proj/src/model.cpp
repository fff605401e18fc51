#include "abcmc/model.hpp"

#include <cmath>
#include <sstream>

#include "abcmc/errors.hpp"

namespace abcmc {

std::int64_t ParamPoint::as_integer() const {
    if (const auto* v = std::get_if<std::int64_t>(&value_)) return *v;
    throw DimensionMismatch("parameter point is real-valued, integer requested");
}

std::span<const double> ParamPoint::coords() const {
    if (const auto* v = std::get_if<std::vector<double>>(&value_)) return *v;
    throw DimensionMismatch("parameter point is integer-valued, coordinates requested");
}

Dimension ParamPoint::dimension() const {
    if (is_integer()) return Dimension::integers();
    return Dimension::reals(std::get<std::vector<double>>(value_).size());
}

std::string ParamPoint::to_string() const {
    if (is_integer()) return std::to_string(as_integer());
    std::ostringstream out;
    out.precision(17);
    out << '(';
    auto c = coords();
    for (std::size_t i = 0; i < c.size(); ++i) out << (i ? ", " : "") << c[i];
    out << ')';
    return out.str();
}

ParamPoint GenerativeModel::prior_sample(RngStream&) const {
    throw Unsupported("model has no prior sampler");
}

double GenerativeModel::exact_hit_prob(const ParamPoint&) const {
    throw MissingExactH("model does not expose an exact hit probability");
}

void GenerativeModel::check_point(const ParamPoint& theta) const {
    if (!(theta.dimension() == dimension())) {
        throw DimensionMismatch("parameter " + theta.to_string() + " does not match model dimension");
    }
}

LambdaModel::LambdaModel(Parts parts) : parts_(std::move(parts)) {
    if (!parts_.prior_density || !parts_.simulate || !parts_.hit) {
        throw DomainError("LambdaModel needs prior_density, simulate and hit");
    }
}

double LambdaModel::prior_density(const ParamPoint& theta) const {
    check_point(theta);
    return floor_density(parts_.prior_density(theta));
}

ParamPoint LambdaModel::prior_sample(RngStream& rng) const {
    if (!parts_.prior_sample) return GenerativeModel::prior_sample(rng);
    return parts_.prior_sample(rng);
}

PseudoData LambdaModel::simulate(const ParamPoint& theta, RngStream& rng) const {
    check_point(theta);
    return parts_.simulate(theta, rng);
}

double LambdaModel::exact_hit_prob(const ParamPoint& theta) const {
    if (!parts_.exact_hit_prob) return GenerativeModel::exact_hit_prob(theta);
    return parts_.exact_hit_prob(theta);
}

HitEstimate hit_probability_mc(const GenerativeModel& model, const ParamPoint& theta,
                               std::uint64_t n_sims, RngStream& rng) {
    if (n_sims == 0) throw DomainError("hit_probability_mc needs n_sims >= 1");
    model.check_point(theta);
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < n_sims; ++i) hits += model.simulate_hit(theta, rng) ? 1 : 0;
    const double n = static_cast<double>(n_sims);
    const double p = static_cast<double>(hits) / n;
    return {p, std::sqrt(p * (1.0 - p) / n)};
}

}  // namespace abcmc
