#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "abcmc/errors.hpp"
#include "abcmc/kernels.hpp"

namespace abcmc {

/// Record of m kernel iterations. states[i] is the state after iteration i + 1.
struct ChainTrace {
    std::vector<ParamPoint> states;
    std::vector<std::uint8_t> accepted;
    /// Likelihood simulations per iteration.
    std::vector<std::uint64_t> sims_used;
    /// Rounds per iteration (see StepOutcome::rounds); N_i in the cost bound.
    std::vector<std::uint64_t> rounds;

    std::size_t size() const { return states.size(); }
};

struct RunResult {
    ChainTrace trace;
    KernelState final_state;
};

using TraceObserver = std::function<void(std::size_t iteration, const StepOutcome&)>;

/// Iterates the kernel m times. Kernel errors are rethrown with the
/// (1-based) iteration index attached.
RunResult run_chain(const Kernel& kernel, KernelState initial, std::size_t m, RngStream& rng,
                    const TraceObserver& observer = {});

using ScalarFn = std::function<double(const ParamPoint&)>;

std::vector<double> evaluate(const ChainTrace& trace, const ScalarFn& phi);

/// Mean of phi over states after burn_in. Default burn-in is m / 10.
double ergodic_average(const ChainTrace& trace, const ScalarFn& phi, std::optional<std::size_t> burn_in = {});

inline constexpr std::size_t kDefaultBatches = 100;

struct BatchMeans {
    /// Estimate of the asymptotic variance sigma^2.
    double asym_var = 0.0;
    /// sqrt(asym_var / m): standard error of the sample mean.
    double std_error = 0.0;
    double mean = 0.0;
};

/// Non-overlapping batch means; the remainder after the last full batch is dropped.
BatchMeans batch_means_variance(std::span<const double> values, std::size_t n_batches = kDefaultBatches);
BatchMeans batch_means_variance(const ChainTrace& trace, const ScalarFn& phi,
                                std::size_t n_batches = kDefaultBatches);

struct CostSummary {
    /// Mean rounds per iteration.
    double n_hat = 0.0;
    double n_hat_se = 0.0;
    /// Mean likelihood simulations per iteration (2 n_hat for the one-hit race).
    double sims_per_iteration = 0.0;
    double acceptance_rate = 0.0;
    std::optional<double> H_inv_bound;
    /// n_hat <= H^{-1} + 3 se, when the bound is supplied.
    std::optional<bool> bound_holds;
};

CostSummary cost_summary(const ChainTrace& trace, std::optional<double> H_inv = {});

struct RejectionResult {
    std::vector<ParamPoint> samples;
    std::uint64_t proposals_used = 0;
    double H_hat = 0.0;
    /// Binomial standard error of H_hat.
    double H_hat_se = 0.0;
};

class CapExhausted : public Error {
public:
    CapExhausted(const std::string& what, RejectionResult partial) : Error(what), partial_(std::move(partial)) {}
    const RejectionResult& partial() const { return partial_; }

private:
    RejectionResult partial_;
};

/// Prior-proposal ABC rejection sampler. Throws CapExhausted (carrying what
/// was gathered) if proposal_cap proposals give fewer than target_accepts.
RejectionResult rejection_sample(const GenerativeModel& model, std::size_t target_accepts, RngStream& rng,
                                 std::uint64_t proposal_cap = UINT64_MAX);

/// CSV: iteration, state coordinates (theta or theta1..thetad), accepted, sims_used.
std::string trace_csv(const ChainTrace& trace);

}  // namespace abcmc
