#include "abcmc/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "abcmc/errors.hpp"

namespace abcmc {

namespace {

void require_probability(double h, const char* name) {
    if (!(h >= 0.0 && h <= 1.0)) throw DomainError(std::string(name) + " must lie in [0, 1]");
}

void require_ratio(double c_ratio) {
    if (!(c_ratio >= 0.0) || std::isnan(c_ratio)) throw DomainError("c_ratio must be >= 0");
}

}  // namespace

double alpha_mh(double h_theta, double h_vartheta, double c_ratio) {
    require_probability(h_theta, "h_theta");
    require_probability(h_vartheta, "h_vartheta");
    require_ratio(c_ratio);
    const double numerator = c_ratio * h_vartheta;
    if (numerator == 0.0) return 0.0;
    if (h_theta == 0.0) throw DomainError("alpha_mh: h_theta = 0 with positive numerator");
    return std::min(1.0, numerator / h_theta);
}

double alpha_onehit(double h_theta, double h_vartheta, double c_ratio) {
    require_probability(h_theta, "h_theta");
    require_probability(h_vartheta, "h_vartheta");
    require_ratio(c_ratio);
    if (h_theta == 0.0 && h_vartheta == 0.0) throw DomainError("alpha_onehit: both hit probabilities are 0");
    // h(t) + h(v) - h(t) h(v) = 1 - (1 - h(t))(1 - h(v)), written to avoid
    // cancellation when both are small.
    const double race_hit = h_theta + h_vartheta * (1.0 - h_theta);
    return std::min(1.0, c_ratio) * h_vartheta / race_hit;
}

double binomial_pmf(std::uint32_t k, std::uint32_t n, double p) {
    if (k > n) return 0.0;
    if (p == 0.0) return k == 0 ? 1.0 : 0.0;
    if (p == 1.0) return k == n ? 1.0 : 0.0;
    const double log_choose = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    return std::exp(log_choose + k * std::log(p) + (n - k) * std::log1p(-p));
}

double alpha_pm2_exact(double h_theta, double h_vartheta, double c_ratio, std::uint32_t n) {
    require_probability(h_theta, "h_theta");
    require_probability(h_vartheta, "h_vartheta");
    require_ratio(c_ratio);
    if (n == 0) throw DomainError("alpha_pm2_exact: N must be >= 1");

    std::vector<double> current(n);
    for (std::uint32_t t = 0; t < n; ++t) current[t] = binomial_pmf(t, n - 1, h_theta);

    // s = 0 contributes nothing.
    double total = 0.0;
    for (std::uint32_t s = 1; s <= n; ++s) {
        const double ps = binomial_pmf(s, n, h_vartheta);
        if (ps == 0.0) continue;
        double inner = 0.0;
        for (std::uint32_t t = 0; t < n; ++t) {
            inner += current[t] * std::min(1.0, c_ratio * s / (1.0 + t));
        }
        total += ps * inner;
    }
    return std::min(1.0, total);
}

}  // namespace abcmc
