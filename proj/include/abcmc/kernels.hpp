#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "abcmc/model.hpp"

namespace abcmc {

struct PlainState {
    ParamPoint theta;
};

/// State of the pseudo-marginal kernel on Theta x Y^N. cached_hits is the
/// number of hits among aux and is kept in sync by the kernel.
struct PseudoMarginalState {
    ParamPoint theta;
    std::vector<PseudoData> aux;
    std::size_t cached_hits = 0;
};

/// State of the eps-augmented kernel: (theta, eps, x) with eps > 0.
struct EpsAugmentedState {
    ParamPoint theta;
    double eps = 1.0;
    PseudoData aux;
};

using KernelState = std::variant<PlainState, PseudoMarginalState, EpsAugmentedState>;

const ParamPoint& theta_of(const KernelState& state);

struct StepOutcome {
    KernelState new_state;
    bool accepted = false;
    /// Likelihood simulations consumed by this step.
    std::uint64_t sims_used = 0;
    std::uint64_t proposals_used = 0;
    /// Simulation rounds in the sense of the cost bound: race length for
    /// the one-hit kernel (each round is one draw at theta and one at the
    /// proposal), N for the pseudo-marginal kernels, 1 for the
    /// eps-augmented kernel and 0 for exact Metropolis-Hastings.
    std::uint64_t rounds = 0;
};

inline constexpr std::uint64_t kDefaultRaceCap = 100'000'000;
inline constexpr std::uint64_t kDefaultInitAttempts = 1'000'000;

/// c(v, t) / c(t, v) with c(t, v) = p(t) q(t, v); 0 when p(v) = 0.
double prior_proposal_ratio(const GenerativeModel& model, const Proposal& proposal,
                            const ParamPoint& theta, const ParamPoint& vartheta);

// --- single steps ---------------------------------------------------------

/// Metropolis-Hastings using the exact hit probability h.
StepOutcome mh_step(const PlainState& state, const GenerativeModel& model, const Proposal& proposal,
                    RngStream& rng);

/// Pseudo-marginal step on Theta x Y^N (the simulations travel with the state).
StepOutcome pm1_step(const PseudoMarginalState& state, const GenerativeModel& model,
                     const Proposal& proposal, std::size_t n, RngStream& rng);

/// Draws x_{1:N} at theta0 until at least one hits.
PseudoMarginalState initialize_pseudo_marginal(const ParamPoint& theta0, const GenerativeModel& model,
                                               std::size_t n, RngStream& rng,
                                               std::uint64_t attempt_cap = kDefaultInitAttempts);

/// Pseudo-marginal step on Theta that refreshes N - 1 simulations at the
/// current point and draws N at the proposal.
StepOutcome pm2_step(const PlainState& state, const GenerativeModel& model, const Proposal& proposal,
                     std::size_t n, RngStream& rng);

/// One-hit race: after the prior/proposal pre-rejection, simulate pairs at
/// theta and at the proposal until the first hit; accept iff the proposal
/// side hit in the deciding round.
StepOutcome onehit_step(const PlainState& state, const GenerativeModel& model, const Proposal& proposal,
                        RngStream& rng, std::uint64_t race_cap = kDefaultRaceCap);

/// Acceptance probability of the eps-augmented move from (t, e, x) to (v, e', z).
double alpha_eps_augmented(const SmoothedModel& model, const Proposal& proposal,
                           const EpsProposal& eps_proposal, const EpsAugmentedState& from,
                           const EpsAugmentedState& to);

StepOutcome p4_step(const EpsAugmentedState& state, const SmoothedModel& model, const Proposal& proposal,
                    const EpsProposal& eps_proposal, RngStream& rng);

// --- kernels as objects ---------------------------------------------------

class Kernel {
public:
    virtual ~Kernel() = default;
    virtual StepOutcome step(const KernelState& state, RngStream& rng) const = 0;
    virtual std::string name() const = 0;
};

using KernelPtr = std::shared_ptr<const Kernel>;

class MetropolisHastingsKernel final : public Kernel {
public:
    /// Throws MissingExactH when the model has no exact h.
    MetropolisHastingsKernel(std::shared_ptr<const GenerativeModel> model,
                             std::shared_ptr<const Proposal> proposal);
    StepOutcome step(const KernelState& state, RngStream& rng) const override;
    std::string name() const override { return "MH"; }

private:
    std::shared_ptr<const GenerativeModel> model_;
    std::shared_ptr<const Proposal> proposal_;
};

class PseudoMarginalKernel final : public Kernel {
public:
    PseudoMarginalKernel(std::shared_ptr<const GenerativeModel> model,
                         std::shared_ptr<const Proposal> proposal, std::size_t n);
    StepOutcome step(const KernelState& state, RngStream& rng) const override;
    std::string name() const override { return "PM1"; }
    std::size_t n() const { return n_; }

private:
    std::shared_ptr<const GenerativeModel> model_;
    std::shared_ptr<const Proposal> proposal_;
    std::size_t n_;
};

class TwoSidedPseudoMarginalKernel final : public Kernel {
public:
    TwoSidedPseudoMarginalKernel(std::shared_ptr<const GenerativeModel> model,
                                 std::shared_ptr<const Proposal> proposal, std::size_t n);
    StepOutcome step(const KernelState& state, RngStream& rng) const override;
    std::string name() const override { return "PM2"; }
    std::size_t n() const { return n_; }

private:
    std::shared_ptr<const GenerativeModel> model_;
    std::shared_ptr<const Proposal> proposal_;
    std::size_t n_;
};

class OneHitKernel final : public Kernel {
public:
    OneHitKernel(std::shared_ptr<const GenerativeModel> model, std::shared_ptr<const Proposal> proposal,
                 std::uint64_t race_cap = kDefaultRaceCap);
    StepOutcome step(const KernelState& state, RngStream& rng) const override;
    std::string name() const override { return "OneHit"; }

private:
    std::shared_ptr<const GenerativeModel> model_;
    std::shared_ptr<const Proposal> proposal_;
    std::uint64_t race_cap_;
};

class EpsAugmentedKernel final : public Kernel {
public:
    EpsAugmentedKernel(std::shared_ptr<const SmoothedModel> model, std::shared_ptr<const Proposal> proposal,
                       std::shared_ptr<const EpsProposal> eps_proposal);
    StepOutcome step(const KernelState& state, RngStream& rng) const override;
    std::string name() const override { return "P4"; }

private:
    std::shared_ptr<const SmoothedModel> model_;
    std::shared_ptr<const Proposal> proposal_;
    std::shared_ptr<const EpsProposal> eps_proposal_;
};

using MixtureComponents = std::vector<std::pair<double, KernelPtr>>;

/// Picks component i with probability a_i and applies it.
StepOutcome mixture_step(const KernelState& state, const MixtureComponents& components, RngStream& rng);

class MixtureKernel final : public Kernel {
public:
    /// Throws WeightSumError unless the weights are >= 0 and sum to 1 within 1e-12.
    explicit MixtureKernel(MixtureComponents components);
    StepOutcome step(const KernelState& state, RngStream& rng) const override;
    std::string name() const override { return "Mixture"; }

private:
    MixtureComponents components_;
};

}  // namespace abcmc
