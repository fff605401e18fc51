#include "abcmc/estimators.hpp"

#include <cmath>
#include <numeric>

#include "abcmc/csv.hpp"

namespace abcmc {

RunResult run_chain(const Kernel& kernel, KernelState initial, std::size_t m, RngStream& rng,
                    const TraceObserver& observer) {
    if (m < 1) throw DomainError("run_chain needs m >= 1");
    RunResult out{{}, std::move(initial)};
    auto& tr = out.trace;
    tr.states.reserve(m);
    tr.accepted.reserve(m);
    tr.sims_used.reserve(m);
    tr.rounds.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        StepOutcome step;
        try {
            step = kernel.step(out.final_state, rng);
        } catch (Error& e) {
            e.set_iteration(i + 1);
            throw;
        }
        if (observer) observer(i, step);
        tr.states.push_back(theta_of(step.new_state));
        tr.accepted.push_back(step.accepted ? 1 : 0);
        tr.sims_used.push_back(step.sims_used);
        tr.rounds.push_back(step.rounds);
        out.final_state = std::move(step.new_state);
    }
    return out;
}

std::vector<double> evaluate(const ChainTrace& trace, const ScalarFn& phi) {
    std::vector<double> v;
    v.reserve(trace.size());
    for (const auto& s : trace.states) v.push_back(phi(s));
    return v;
}

double ergodic_average(const ChainTrace& trace, const ScalarFn& phi, std::optional<std::size_t> burn_in) {
    const std::size_t m = trace.size();
    const std::size_t skip = burn_in.value_or(m / 10);
    if (skip >= m) throw DomainError("ergodic_average: burn-in must be smaller than the trace length");
    double sum = 0.0;
    for (std::size_t i = skip; i < m; ++i) sum += phi(trace.states[i]);
    return sum / static_cast<double>(m - skip);
}

BatchMeans batch_means_variance(std::span<const double> values, std::size_t n_batches) {
    if (n_batches < 2) throw DomainError("batch_means_variance needs at least 2 batches");
    const std::size_t len = values.size() / n_batches;
    if (len < 1) throw DomainError("batch_means_variance: fewer values than batches");
    std::vector<double> means(n_batches);
    for (std::size_t k = 0; k < n_batches; ++k) {
        const auto first = values.begin() + static_cast<std::ptrdiff_t>(k * len);
        means[k] = std::accumulate(first, first + static_cast<std::ptrdiff_t>(len), 0.0) / static_cast<double>(len);
    }
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(n_batches);
    double ss = 0.0;
    for (double mu : means) ss += (mu - grand) * (mu - grand);
    BatchMeans out;
    out.mean = grand;
    out.asym_var = static_cast<double>(len) * ss / static_cast<double>(n_batches - 1);
    out.std_error = std::sqrt(out.asym_var / static_cast<double>(len * n_batches));
    return out;
}

BatchMeans batch_means_variance(const ChainTrace& trace, const ScalarFn& phi, std::size_t n_batches) {
    const auto v = evaluate(trace, phi);
    return batch_means_variance(std::span<const double>(v), n_batches);
}

CostSummary cost_summary(const ChainTrace& trace, std::optional<double> H_inv) {
    CostSummary out;
    const std::size_t m = trace.size();
    if (m == 0) return out;
    std::vector<double> rounds(trace.rounds.begin(), trace.rounds.end());
    const double md = static_cast<double>(m);
    out.n_hat = std::accumulate(rounds.begin(), rounds.end(), 0.0) / md;
    if (m >= 2 * kDefaultBatches) {
        out.n_hat_se = batch_means_variance(std::span<const double>(rounds)).std_error;
    } else if (m >= 2) {
        double ss = 0.0;
        for (double r : rounds) ss += (r - out.n_hat) * (r - out.n_hat);
        out.n_hat_se = std::sqrt(ss / (md - 1.0) / md);
    }
    double sims = 0.0;
    for (auto s : trace.sims_used) sims += static_cast<double>(s);
    out.sims_per_iteration = sims / md;
    out.acceptance_rate =
        static_cast<double>(std::accumulate(trace.accepted.begin(), trace.accepted.end(), std::size_t{0})) / md;
    if (H_inv) {
        out.H_inv_bound = H_inv;
        out.bound_holds = out.n_hat <= *H_inv + 3.0 * out.n_hat_se;
    }
    return out;
}

RejectionResult rejection_sample(const GenerativeModel& model, std::size_t target_accepts, RngStream& rng,
                                 std::uint64_t proposal_cap) {
    if (target_accepts < 1) throw DomainError("rejection_sample needs target_accepts >= 1");
    if (!model.has_prior_sampler()) throw Unsupported("rejection_sample needs a prior sampler");
    RejectionResult out;
    auto finish = [&] {
        const double n = static_cast<double>(out.proposals_used);
        out.H_hat = n > 0 ? static_cast<double>(out.samples.size()) / n : 0.0;
        out.H_hat_se = n > 0 ? std::sqrt(out.H_hat * (1.0 - out.H_hat) / n) : 0.0;
    };
    while (out.samples.size() < target_accepts) {
        if (out.proposals_used >= proposal_cap) {
            finish();
            throw CapExhausted("rejection sampler hit its proposal cap after " + std::to_string(out.samples.size()) +
                                   " accepts",
                               std::move(out));
        }
        ParamPoint theta = model.prior_sample(rng);
        ++out.proposals_used;
        if (model.simulate_hit(theta, rng)) out.samples.push_back(std::move(theta));
    }
    finish();
    return out;
}

std::string trace_csv(const ChainTrace& trace) {
    std::vector<std::string> header{"iteration"};
    const std::size_t d = trace.size() == 0 || trace.states[0].is_integer() ? 0 : trace.states[0].coords().size();
    if (d == 0) {
        header.emplace_back("theta");
    } else {
        for (std::size_t k = 0; k < d; ++k) header.push_back("theta" + std::to_string(k + 1));
    }
    header.emplace_back("accepted");
    header.emplace_back("sims_used");
    CsvWriter csv(header);
    for (std::size_t i = 0; i < trace.size(); ++i) {
        csv.cell(i + 1);
        const auto& s = trace.states[i];
        if (s.is_integer()) {
            csv.cell(static_cast<long long>(s.as_integer()));
        } else {
            for (double c : s.coords()) csv.cell(c);
        }
        csv.cell(static_cast<int>(trace.accepted[i])).cell(static_cast<unsigned long long>(trace.sims_used[i]));
        csv.end_row();
    }
    return csv.str();
}

}  // namespace abcmc
