#include "abcmc/proposals.hpp"

#include <cmath>
#include <numbers>

#include "abcmc/errors.hpp"

namespace abcmc {

namespace {

double normal_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

ParamPoint NeighbourWalk::sample(const ParamPoint& from, RngStream& rng) const {
    const auto t = from.as_integer();
    return ParamPoint::integer(rng.uniform() < 0.5 ? t - 1 : t + 1);
}

double NeighbourWalk::density(const ParamPoint& from, const ParamPoint& to) const {
    const auto d = to.as_integer() - from.as_integer();
    return (d == 1 || d == -1) ? 0.5 : 0.0;
}

GaussianRandomWalk::GaussianRandomWalk(std::vector<double> step_sd) : sd_(std::move(step_sd)) {
    for (double s : sd_) {
        if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("random-walk step sd must be finite and >= 0");
    }
}

ParamPoint GaussianRandomWalk::sample(const ParamPoint& from, RngStream& rng) const {
    auto c = from.coords();
    if (c.size() != sd_.size()) throw DimensionMismatch("random-walk dimension mismatch");
    std::vector<double> out(c.begin(), c.end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (sd_[i] > 0.0) out[i] += sd_[i] * rng.normal();
    }
    return ParamPoint::real(std::move(out));
}

double GaussianRandomWalk::density(const ParamPoint& from, const ParamPoint& to) const {
    auto a = from.coords();
    auto b = to.coords();
    if (a.size() != sd_.size() || b.size() != sd_.size()) throw DimensionMismatch("random-walk dimension mismatch");
    double d = 1.0;
    for (std::size_t i = 0; i < sd_.size(); ++i) {
        // frozen coordinates contribute a unit point mass
        if (sd_[i] == 0.0) {
            if (a[i] != b[i]) return 0.0;
            continue;
        }
        d *= normal_pdf(b[i], a[i], sd_[i]);
    }
    return d;
}

ParamPoint TwoBlockFlip::sample(const ParamPoint& from, RngStream& rng) const {
    const double t = from.coord(0);
    if (t < 0.0 || t > 1.0) throw DomainError("two-block flip is defined on [0, 1] only");
    const double u = rng.uniform_open() * 0.5;
    return ParamPoint::real({t <= 0.5 ? 0.5 + u : u});
}

double TwoBlockFlip::density(const ParamPoint& from, const ParamPoint& to) const {
    const double t = from.coord(0);
    const double v = to.coord(0);
    const bool t_low = 0.0 <= t && t <= 0.5;
    const bool t_high = 0.5 < t && t <= 1.0;
    const bool v_low = 0.0 <= v && v <= 0.5;
    const bool v_high = 0.5 < v && v <= 1.0;
    return (t_low && v_high) || (t_high && v_low) ? 2.0 : 0.0;
}

LogScaleEpsWalk::LogScaleEpsWalk(double scale) : scale_(scale) {
    if (!(scale > 0.0)) throw DomainError("eps walk scale must be positive");
}

double LogScaleEpsWalk::sample(double eps, RngStream& rng) const {
    return eps * std::exp(scale_ * rng.normal());
}

double LogScaleEpsWalk::density(double from, double to) const {
    if (!(from > 0.0) || !(to > 0.0)) return 0.0;
    return normal_pdf(std::log(to), std::log(from), scale_) / to;
}

ReflectedEpsWalk::ReflectedEpsWalk(double scale) : scale_(scale) {
    if (!(scale > 0.0)) throw DomainError("eps walk scale must be positive");
}

double ReflectedEpsWalk::sample(double eps, RngStream& rng) const {
    double e = std::abs(eps + scale_ * rng.normal());
    while (e == 0.0) e = std::abs(eps + scale_ * rng.normal());
    return e;
}

double ReflectedEpsWalk::density(double from, double to) const {
    if (!(to > 0.0)) return 0.0;
    return normal_pdf(to, from, scale_) + normal_pdf(-to, from, scale_);
}

}  // namespace abcmc
