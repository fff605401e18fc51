#include "abcmc/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "abcmc/acceptance.hpp"
#include "abcmc/errors.hpp"

namespace abcmc {

const ParamPoint& theta_of(const KernelState& state) {
    return std::visit([](const auto& s) -> const ParamPoint& { return s.theta; }, state);
}

double prior_proposal_ratio(const GenerativeModel& model, const Proposal& proposal, const ParamPoint& theta,
                            const ParamPoint& vartheta) {
    model.check_point(vartheta);
    const double p_v = floor_density(model.prior_density(vartheta));
    if (p_v == 0.0) return 0.0;
    const double p_t = floor_density(model.prior_density(theta));
    if (p_t == 0.0) throw DomainError("current state " + theta.to_string() + " has zero prior density");
    if (proposal.symmetric()) return p_v / p_t;
    const double q_tv = floor_density(proposal.density(theta, vartheta));
    const double q_vt = floor_density(proposal.density(vartheta, theta));
    // 0/0 and x/0 are measure-zero configurations; treat them as rejections.
    if (q_tv == 0.0 || q_vt == 0.0) return 0.0;
    return (p_v * q_vt) / (p_t * q_tv);
}

namespace {

StepOutcome stay(KernelState state, std::uint64_t sims, std::uint64_t rounds) {
    return StepOutcome{std::move(state), false, sims, 1, rounds};
}

bool accept_with(double probability, RngStream& rng) {
    if (probability <= 0.0) return false;
    if (probability >= 1.0) return true;
    return rng.uniform() < probability;
}

}  // namespace

StepOutcome mh_step(const PlainState& state, const GenerativeModel& model, const Proposal& proposal,
                    RngStream& rng) {
    if (!model.has_exact_hit_prob()) throw MissingExactH("Metropolis-Hastings needs an exact hit probability");
    model.check_point(state.theta);
    const double h_t = model.exact_hit_prob(state.theta);
    if (!(h_t > 0.0)) throw DomainError("Metropolis-Hastings state has h(theta) = 0");

    ParamPoint proposed = proposal.sample(state.theta, rng);
    const double c = prior_proposal_ratio(model, proposal, state.theta, proposed);
    if (c == 0.0) return stay(state, 0, 0);
    const double alpha = alpha_mh(h_t, model.exact_hit_prob(proposed), c);
    if (!accept_with(alpha, rng)) return stay(state, 0, 0);
    return StepOutcome{PlainState{std::move(proposed)}, true, 0, 1, 0};
}

PseudoMarginalState initialize_pseudo_marginal(const ParamPoint& theta0, const GenerativeModel& model,
                                               std::size_t n, RngStream& rng, std::uint64_t attempt_cap) {
    if (n == 0) throw DomainError("pseudo-marginal N must be >= 1");
    model.check_point(theta0);
    if (floor_density(model.prior_density(theta0)) == 0.0) {
        throw DomainError("initial point " + theta0.to_string() + " has zero prior density");
    }
    for (std::uint64_t attempt = 0; attempt < attempt_cap; ++attempt) {
        PseudoMarginalState s{theta0, {}, 0};
        s.aux.reserve(n);
        for (std::size_t j = 0; j < n; ++j) {
            s.aux.push_back(model.simulate(theta0, rng));
            if (model.hit(s.aux.back())) ++s.cached_hits;
        }
        if (s.cached_hits > 0) return s;
    }
    throw InitializationFailed("no hit at " + theta0.to_string() + " within the attempt cap");
}

StepOutcome pm1_step(const PseudoMarginalState& state, const GenerativeModel& model, const Proposal& proposal,
                     std::size_t n, RngStream& rng) {
    if (n == 0) throw DomainError("pseudo-marginal N must be >= 1");
    if (state.aux.size() != n) throw DomainError("pseudo-marginal state carries a different N");
    if (state.cached_hits > n) throw DomainError("cached hit count exceeds N");
    if (state.cached_hits == 0) throw DegenerateState("pseudo-marginal state has no hits");
    model.check_point(state.theta);

    ParamPoint proposed = proposal.sample(state.theta, rng);
    const double c = prior_proposal_ratio(model, proposal, state.theta, proposed);
    // The acceptance ratio vanishes for every z, so skip the simulations.
    if (c == 0.0) return stay(state, 0, 0);

    std::vector<PseudoData> z;
    z.reserve(n);
    std::size_t hits = 0;
    for (std::size_t j = 0; j < n; ++j) {
        z.push_back(model.simulate(proposed, rng));
        if (model.hit(z.back())) ++hits;
    }
    const double ratio = c * static_cast<double>(hits) / static_cast<double>(state.cached_hits);
    if (hits == 0 || !accept_with(ratio, rng)) return stay(state, n, n);
    return StepOutcome{PseudoMarginalState{std::move(proposed), std::move(z), hits}, true, n, 1, n};
}

StepOutcome pm2_step(const PlainState& state, const GenerativeModel& model, const Proposal& proposal,
                     std::size_t n, RngStream& rng) {
    if (n == 0) throw DomainError("pseudo-marginal N must be >= 1");
    model.check_point(state.theta);

    ParamPoint proposed = proposal.sample(state.theta, rng);
    const double c = prior_proposal_ratio(model, proposal, state.theta, proposed);
    if (c == 0.0) return stay(state, 0, 0);

    std::size_t current_hits = 0;
    for (std::size_t j = 0; j + 1 < n; ++j) current_hits += model.simulate_hit(state.theta, rng) ? 1 : 0;
    std::size_t proposed_hits = 0;
    for (std::size_t j = 0; j < n; ++j) proposed_hits += model.simulate_hit(proposed, rng) ? 1 : 0;

    const std::uint64_t sims = 2 * n - 1;
    const double ratio = c * static_cast<double>(proposed_hits) / (1.0 + static_cast<double>(current_hits));
    if (proposed_hits == 0 || !accept_with(ratio, rng)) return stay(state, sims, n);
    return StepOutcome{PlainState{std::move(proposed)}, true, sims, 1, n};
}

StepOutcome onehit_step(const PlainState& state, const GenerativeModel& model, const Proposal& proposal,
                        RngStream& rng, std::uint64_t race_cap) {
    model.check_point(state.theta);
    ParamPoint proposed = proposal.sample(state.theta, rng);
    const double c = prior_proposal_ratio(model, proposal, state.theta, proposed);

    // Pre-rejection with probability 1 - {1 ^ c}; no simulations spent.
    if (c == 0.0) return stay(state, 0, 0);
    if (c < 1.0 && !(rng.uniform() < c)) return stay(state, 0, 0);

    for (std::uint64_t round = 1; round <= race_cap; ++round) {
        const bool current_hit = model.simulate_hit(state.theta, rng);
        const bool proposed_hit = model.simulate_hit(proposed, rng);
        if (current_hit || proposed_hit) {
            if (proposed_hit) return StepOutcome{PlainState{std::move(proposed)}, true, 2 * round, 1, round};
            return stay(state, 2 * round, round);
        }
    }
    throw RaceCapExceeded("one-hit race between " + state.theta.to_string() + " and " + proposed.to_string() +
                          " ran " + std::to_string(race_cap) + " rounds without a hit");
}

double alpha_eps_augmented(const SmoothedModel& model, const Proposal& proposal, const EpsProposal& eps_proposal,
                           const EpsAugmentedState& from, const EpsAugmentedState& to) {
    const double k_from = floor_density(model.smoothing_kernel(from.aux, from.eps));
    const double p_from = floor_density(model.prior_density(from.theta) * model.eps_prior_density(from.eps));
    if (k_from == 0.0 || p_from == 0.0) throw DomainError("eps-augmented state has zero target density");

    double numerator = model.prior_density(to.theta) * model.eps_prior_density(to.eps) *
                       eps_proposal.density(to.eps, from.eps) * model.smoothing_kernel(to.aux, to.eps);
    double denominator = p_from * eps_proposal.density(from.eps, to.eps) * k_from;
    if (!proposal.symmetric()) {
        numerator *= proposal.density(to.theta, from.theta);
        denominator *= proposal.density(from.theta, to.theta);
    }
    numerator = floor_density(numerator);
    denominator = floor_density(denominator);
    if (numerator == 0.0 || denominator == 0.0) return 0.0;
    return std::min(1.0, numerator / denominator);
}

StepOutcome p4_step(const EpsAugmentedState& state, const SmoothedModel& model, const Proposal& proposal,
                    const EpsProposal& eps_proposal, RngStream& rng) {
    if (!(state.eps > 0.0)) throw DomainError("eps-augmented state needs eps > 0");
    model.check_point(state.theta);
    if (floor_density(model.smoothing_kernel(state.aux, state.eps)) == 0.0) {
        throw DomainError("eps-augmented state has K_eps(x, y) = 0");
    }

    EpsAugmentedState next{proposal.sample(state.theta, rng), eps_proposal.sample(state.eps, rng), {}};
    model.check_point(next.theta);
    if (floor_density(model.prior_density(next.theta) * model.eps_prior_density(next.eps)) == 0.0) {
        return stay(state, 0, 0);
    }
    next.aux = model.simulate(next.theta, rng);
    const double alpha = alpha_eps_augmented(model, proposal, eps_proposal, state, next);
    if (!accept_with(alpha, rng)) return stay(state, 1, 1);
    return StepOutcome{std::move(next), true, 1, 1, 1};
}

// --- kernel objects -------------------------------------------------------

namespace {

template <typename State>
const State& expect_state(const KernelState& state, const char* kernel) {
    if (const auto* s = std::get_if<State>(&state)) return *s;
    throw DomainError(std::string(kernel) + " received a state of the wrong variant");
}

void require(const void* p, const char* what) {
    if (!p) throw DomainError(std::string(what) + " must not be null");
}

}  // namespace

MetropolisHastingsKernel::MetropolisHastingsKernel(std::shared_ptr<const GenerativeModel> model,
                                                   std::shared_ptr<const Proposal> proposal)
    : model_(std::move(model)), proposal_(std::move(proposal)) {
    require(model_.get(), "model");
    require(proposal_.get(), "proposal");
    if (!model_->has_exact_hit_prob()) throw MissingExactH("Metropolis-Hastings needs an exact hit probability");
}

StepOutcome MetropolisHastingsKernel::step(const KernelState& state, RngStream& rng) const {
    return mh_step(expect_state<PlainState>(state, "MH"), *model_, *proposal_, rng);
}

PseudoMarginalKernel::PseudoMarginalKernel(std::shared_ptr<const GenerativeModel> model,
                                           std::shared_ptr<const Proposal> proposal, std::size_t n)
    : model_(std::move(model)), proposal_(std::move(proposal)), n_(n) {
    require(model_.get(), "model");
    require(proposal_.get(), "proposal");
    if (n_ == 0) throw DomainError("pseudo-marginal N must be >= 1");
}

StepOutcome PseudoMarginalKernel::step(const KernelState& state, RngStream& rng) const {
    return pm1_step(expect_state<PseudoMarginalState>(state, "PM1"), *model_, *proposal_, n_, rng);
}

TwoSidedPseudoMarginalKernel::TwoSidedPseudoMarginalKernel(std::shared_ptr<const GenerativeModel> model,
                                                           std::shared_ptr<const Proposal> proposal,
                                                           std::size_t n)
    : model_(std::move(model)), proposal_(std::move(proposal)), n_(n) {
    require(model_.get(), "model");
    require(proposal_.get(), "proposal");
    if (n_ == 0) throw DomainError("pseudo-marginal N must be >= 1");
}

StepOutcome TwoSidedPseudoMarginalKernel::step(const KernelState& state, RngStream& rng) const {
    return pm2_step(expect_state<PlainState>(state, "PM2"), *model_, *proposal_, n_, rng);
}

OneHitKernel::OneHitKernel(std::shared_ptr<const GenerativeModel> model, std::shared_ptr<const Proposal> proposal,
                           std::uint64_t race_cap)
    : model_(std::move(model)), proposal_(std::move(proposal)), race_cap_(race_cap) {
    require(model_.get(), "model");
    require(proposal_.get(), "proposal");
    if (race_cap_ == 0) throw DomainError("race cap must be positive");
}

StepOutcome OneHitKernel::step(const KernelState& state, RngStream& rng) const {
    return onehit_step(expect_state<PlainState>(state, "OneHit"), *model_, *proposal_, rng, race_cap_);
}

EpsAugmentedKernel::EpsAugmentedKernel(std::shared_ptr<const SmoothedModel> model,
                                       std::shared_ptr<const Proposal> proposal,
                                       std::shared_ptr<const EpsProposal> eps_proposal)
    : model_(std::move(model)), proposal_(std::move(proposal)), eps_proposal_(std::move(eps_proposal)) {
    require(model_.get(), "model");
    require(proposal_.get(), "proposal");
    require(eps_proposal_.get(), "eps proposal");
}

StepOutcome EpsAugmentedKernel::step(const KernelState& state, RngStream& rng) const {
    return p4_step(expect_state<EpsAugmentedState>(state, "P4"), *model_, *proposal_, *eps_proposal_, rng);
}

namespace {

void validate_weights(const MixtureComponents& components) {
    if (components.empty()) throw WeightSumError("mixture has no components");
    double sum = 0.0;
    for (const auto& [w, k] : components) {
        if (!(w >= 0.0)) throw WeightSumError("mixture weights must be nonnegative");
        if (!k) throw DomainError("mixture component must not be null");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw WeightSumError("mixture weights sum to " + std::to_string(sum));
}

}  // namespace

StepOutcome mixture_step(const KernelState& state, const MixtureComponents& components, RngStream& rng) {
    validate_weights(components);
    const double u = rng.uniform();
    double cumulative = 0.0;
    for (const auto& [w, k] : components) {
        cumulative += w;
        if (u < cumulative) return k->step(state, rng);
    }
    // u landed in the rounding slack above the last positive weight
    for (auto it = components.rbegin(); it != components.rend(); ++it) {
        if (it->first > 0.0) return it->second->step(state, rng);
    }
    throw WeightSumError("mixture has no positive weight");
}

MixtureKernel::MixtureKernel(MixtureComponents components) : components_(std::move(components)) {
    validate_weights(components_);
}

StepOutcome MixtureKernel::step(const KernelState& state, RngStream& rng) const {
    return mixture_step(state, components_, rng);
}

}  // namespace abcmc
