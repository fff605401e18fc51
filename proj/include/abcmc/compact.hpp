#pragma once

#include <string>
#include <utility>
#include <vector>

#include "abcmc/finite_chain.hpp"
#include "abcmc/model.hpp"

namespace abcmc {

/// Uniform prior on [0, a], h(theta) = b on [0, 1] and 0 elsewhere, with the
/// two-block flip proposal.
struct CompactExampleSpec {
    double a = 1.0;
    double b = 1.0;

    /// Throws DomainError unless a >= 1 and b in (0, 1].
    void validate() const;
};

class CompactModel final : public GenerativeModel {
public:
    explicit CompactModel(CompactExampleSpec spec);

    Dimension dimension() const override { return Dimension::reals(1); }
    double prior_density(const ParamPoint& theta) const override;
    bool prior_normalized() const override { return true; }
    bool has_prior_sampler() const override { return true; }
    ParamPoint prior_sample(RngStream& rng) const override;
    PseudoData simulate(const ParamPoint& theta, RngStream& rng) const override;
    bool hit(const PseudoData& x) const override { return !x.empty() && x[0] > 0.5; }
    bool has_exact_hit_prob() const override { return true; }
    double exact_hit_prob(const ParamPoint& theta) const override;

private:
    CompactExampleSpec spec_;
};

/// The flip dynamics lumped onto the blocks [0, 1/2] and (1/2, 1].
/// Returns {"MH", chain} and {"OneHit", chain}, both with pi = (1/2, 1/2).
std::vector<std::pair<std::string, FiniteChain>> compact_two_block_chains(const CompactExampleSpec& spec);

/// 1 / H = a / b.
double compact_inverse_hit_rate(const CompactExampleSpec& spec);

}  // namespace abcmc
