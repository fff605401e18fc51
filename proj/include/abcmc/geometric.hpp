#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "abcmc/finite_chain.hpp"
#include "abcmc/model.hpp"

namespace abcmc {

/// Geometric prior (1 - a) a^{theta - 1} on {1, ..., D} with hit
/// probability b^theta and the nearest-neighbour proposal.
struct GeometricExampleSpec {
    double a = 0.5;
    double b = 0.5;
    int D = 50;

    /// Throws DomainError unless a, b are in (0, 1) and D >= 2.
    void validate() const;
};

/// The geometric example as a simulator. With no truncation the prior is
/// the full geometric law on {1, 2, ...}; with truncation the density is
/// left unnormalised, as written above.
class GeometricModel final : public GenerativeModel {
public:
    GeometricModel(double a, double b, std::optional<int> truncation = std::nullopt);

    Dimension dimension() const override { return Dimension::integers(); }
    double prior_density(const ParamPoint& theta) const override;
    bool prior_normalized() const override { return !truncation_; }
    bool has_prior_sampler() const override { return true; }
    ParamPoint prior_sample(RngStream& rng) const override;
    PseudoData simulate(const ParamPoint& theta, RngStream& rng) const override;
    bool hit(const PseudoData& x) const override { return !x.empty() && x[0] > 0.5; }
    bool has_exact_hit_prob() const override { return true; }
    double exact_hit_prob(const ParamPoint& theta) const override;

private:
    double a_;
    double b_;
    std::optional<int> truncation_;
};

enum class KernelKind { MH, PM2, OneHit };

struct KernelChoice {
    KernelKind kind = KernelKind::MH;
    std::uint32_t n = 0;  // simulations per side for PM2

    /// "MH", "OneHit" or "PM2"; the N column carries the PM2 size.
    std::string label() const;
    friend bool operator==(const KernelChoice&, const KernelChoice&) = default;
};

/// Parses "MH", "OneHit", "PM2(100)" / "PM2_100".
KernelChoice parse_kernel_choice(const std::string& text);

/// n_R = 1 / H for the untruncated model: (1 - ab) / (b (1 - a)).
double nR_closed(double a, double b);

struct CostBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// Lower and upper bounds on the expected race rounds of the one-hit kernel
/// (untruncated model).
CostBounds n_bounds(double a, double b);

/// Expected race rounds per iteration of the stationary one-hit chain on
/// the truncated model. Proposals outside {1..D} cost nothing.
double n_exact(const GeometricExampleSpec& spec);

/// Stationary vector (ab)^{theta - 1} normalised on {1..D}.
Eigen::VectorXd geometric_stationary(const GeometricExampleSpec& spec);

/// Exact chains on {1..D} for each requested kernel, in request order.
std::vector<std::pair<KernelChoice, FiniteChain>> build_geometric_chains(const GeometricExampleSpec& spec,
                                                                          const std::vector<KernelChoice>& kernels);

FiniteChain build_geometric_chain(const GeometricExampleSpec& spec, const KernelChoice& kernel);

struct TestFunctions {
    std::vector<double> phi1;  // theta
    std::vector<double> phi2;  // (ab)^{-theta / 2.1}
    /// I(theta >= t) on {1..D}.
    std::vector<double> phi3(int t) const;
    int D = 0;
};

TestFunctions test_functions(const GeometricExampleSpec& spec);

/// pi(theta >= t) for the untruncated posterior: (ab)^{t - 1}.
double tail_probability_untruncated(double a, double b, int t);

struct FigureGrid {
    double a = 0.5;
    std::vector<double> b_values{0.1, 0.5, 0.9};
    std::vector<int> d_grid{5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
    std::vector<int> t_grid = [] {
        std::vector<int> t;
        for (int i = 1; i <= 30; ++i) t.push_back(i);
        return t;
    }();
    /// Truncation level used for the tail-probability family.
    int tail_D = 50;
    std::vector<double> a_values_vary{0.9, 0.99, 0.999};
    double b_vary = 0.5;
    std::vector<KernelChoice> kernels{{KernelKind::PM2, 1}, {KernelKind::PM2, 100}, {KernelKind::OneHit, 0},
                                      {KernelKind::MH, 0}};
};

/// One CSV document per figure family, keyed by file name. Columns are
/// kernel,N,a,b,x,value with x = D or t.
std::vector<std::pair<std::string, std::string>> figure_tables(const FigureGrid& grid, unsigned threads = 1);

/// Writes figure_tables() into output_dir and returns the written paths.
std::vector<std::string> figure_pipeline(const FigureGrid& grid, const std::string& output_dir, unsigned threads = 1);

}  // namespace abcmc
