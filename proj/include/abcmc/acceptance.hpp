#pragma once

#include <cstdint>

namespace abcmc {

// Closed-form acceptance probabilities of the kernels that live on the
// parameter space alone. Arguments are the hit probabilities at the current
// and proposed points and c_ratio = p(v) q(v, t) / (p(t) q(t, v)).

/// Metropolis-Hastings with exact h: 1 ^ (c_ratio h(v) / h(t)).
double alpha_mh(double h_theta, double h_vartheta, double c_ratio);

/// One-hit race kernel: {1 ^ c_ratio} h(v) / (h(t) + h(v) - h(t) h(v)).
double alpha_onehit(double h_theta, double h_vartheta, double c_ratio);

/// Marginal acceptance of the two-sided pseudo-marginal kernel with N
/// simulations at the proposed point and N - 1 at the current one:
///   sum_{s, t} Bin(s; N, h(v)) Bin(t; N - 1, h(t)) [1 ^ c_ratio s / (1 + t)].
double alpha_pm2_exact(double h_theta, double h_vartheta, double c_ratio, std::uint32_t n);

/// Binomial probability mass function, accurate for tiny success
/// probabilities.
double binomial_pmf(std::uint32_t k, std::uint32_t n, double p);

}  // namespace abcmc
