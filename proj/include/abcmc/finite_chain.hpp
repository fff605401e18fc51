#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "abcmc/model.hpp"

namespace abcmc {

/// A reversible chain on an explicit finite state list. P is row
/// stochastic and pi is its stationary vector.
struct FiniteChain {
    std::vector<ParamPoint> states;
    Eigen::MatrixXd P;
    Eigen::VectorXd pi;

    std::size_t size() const { return states.size(); }
};

inline constexpr double kRowSumTol = 1e-12;
inline constexpr double kStationaryTol = 1e-10;
inline constexpr double kReversibilityTol = 1e-10;
inline constexpr std::size_t kConductanceStateLimit = 20;

using AcceptanceFn = std::function<double(std::size_t, std::size_t)>;

/// P(i, j) = q(i, j) alpha(i, j) off the diagonal and the remainder on it.
/// Proposal rows may sum to less than one; the missing mass is proposal
/// outside the state set and is rejected. The stationary vector is the
/// supplied one (checked), the detailed-balance product for nearest
/// neighbour chains, or the solution of (P^T - I) pi = 0 otherwise.
/// Throws NotReversible or NotStationary when the result is inconsistent.
FiniteChain build_finite_kernel(std::vector<ParamPoint> states, const Eigen::MatrixXd& proposal,
                                const AcceptanceFn& acceptance,
                                std::optional<Eigen::VectorXd> stationary = std::nullopt);

/// Wraps an explicit transition matrix, computing pi as above.
FiniteChain finite_chain_from_matrix(std::vector<ParamPoint> states, Eigen::MatrixXd P,
                                     std::optional<Eigen::VectorXd> stationary = std::nullopt);

/// Checks stochasticity, stationarity and detailed balance; throws on failure.
void validate_chain(const FiniteChain& chain);

/// True when only P(i, i +- 1) may be nonzero off the diagonal and every
/// such entry is positive (an irreducible birth-death chain).
bool is_birth_death(const FiniteChain& chain);

struct SpectralSummary {
    /// Spectrum of P in descending order.
    std::vector<double> eigenvalues;
    /// 1 - sup of the spectrum without the unit eigenvalue.
    double gap_vb = 0.0;
    /// 1 - max modulus of the spectrum without the unit eigenvalue.
    double gap_ge = 0.0;
    double pi_min = 0.0;

    double lambda_star() const { return 1.0 - gap_ge; }
};

/// Eigenvalues of the pi-symmetrised matrix by Jacobi rotations. For
/// birth-death chains gap_vb is taken from birth_death_gap, which keeps
/// full relative accuracy when the gap is far below machine epsilon.
SpectralSummary spectral_summary(const FiniteChain& chain);

/// 1 - lambda_2 for an irreducible birth-death chain, computed from the
/// explicit Green's function of the edge Laplacian (all terms positive).
double birth_death_gap(const FiniteChain& chain);

/// Kemeny-Snell: with f = phi - pi(phi) and Z = (I - P + 1 pi^T)^{-1},
/// returns sum_i pi_i f_i (2 (Z f)_i - f_i).
double asymptotic_variance_fundamental(const FiniteChain& chain, std::span<const double> phi);

/// sum_k (1 + l_k) / (1 - l_k) <f, v_k>_pi^2 over the non-unit spectrum.
double asymptotic_variance_spectral(const FiniteChain& chain, std::span<const double> phi);

/// The fundamental-matrix route with the factorisation kept for reuse
/// across test functions. When I - P + 1 pi^T is badly conditioned in
/// double precision it is refactored in wider binary floats (40 to 320
/// digits) until two widths agree.
class FundamentalVariance {
public:
    explicit FundamentalVariance(const FiniteChain& chain);
    ~FundamentalVariance();
    FundamentalVariance(FundamentalVariance&&) noexcept;

    double operator()(std::span<const double> phi) const;
    /// Working precision in decimal digits (16 for doubles).
    int digits() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// The spectral route with the eigendecomposition of I - D^{1/2} P D^{-1/2}
/// kept for reuse. Widens the working precision until the smallest
/// non-zero eigenvalue clears the rounding level.
class SpectralVariance {
public:
    explicit SpectralVariance(const FiniteChain& chain);
    ~SpectralVariance();
    SpectralVariance(SpectralVariance&&) noexcept;

    double operator()(std::span<const double> phi) const;
    int digits() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Birth-death closed form 2 sum_e G_e^2 / C_e - Var_pi(phi), where G_e is
/// the cumulative pi-weighted centred sum and C_e the edge flow.
double asymptotic_variance_birth_death(const FiniteChain& chain, std::span<const double> phi);

/// 0 for constant phi; birth-death closed form when applicable, fundamental matrix otherwise.
double asymptotic_variance(const FiniteChain& chain, std::span<const double> phi);

/// Total variation distance to pi after m = 1..m_max steps from one state.
/// Summed over the decaying eigenmodes, so distances far below 1e-16 keep
/// their relative accuracy.
std::vector<double> tv_curve(const FiniteChain& chain, std::size_t start_index, std::size_t m_max);

/// Worst case over starting states of tv_curve.
std::vector<double> tv_curve_worst(const FiniteChain& chain, std::size_t m_max);

struct TvBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// Spectral sandwich for the worst-start total variation distance after m steps:
/// l^m / 2 <= TV <= l^m / 2 sqrt((1 - pi_min) / pi_min) with l = max |non-unit eigenvalue|.
TvBounds tv_bounds_mt(const SpectralSummary& summary, std::size_t m);
TvBounds tv_bounds_mt(const FiniteChain& chain, std::size_t m);

struct Conductance {
    double kappa = 0.0;
    std::vector<std::size_t> argmin_set;
};

/// Exhaustive minimum over A with 0 < pi(A) <= 1/2 of Q(A, A^c) / pi(A).
/// Throws TooManyStates above kConductanceStateLimit states.
Conductance conductance_exact(const FiniteChain& chain);

/// sum_i w_i P_i for chains sharing states and pi.
FiniteChain mixture_matrix(const std::vector<FiniteChain>& chains, const std::vector<double>& weights);

/// CSV with header state,pi,p0,...,p{n-1}; one row per state.
void write_chain_csv(const FiniteChain& chain, const std::string& path);
FiniteChain read_chain_csv(const std::string& path);

}  // namespace abcmc
