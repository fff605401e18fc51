#include "abcmc/lotka_volterra.hpp"

#include <cmath>
#include <random>

#include "abcmc/csv.hpp"
#include "abcmc/errors.hpp"
#include "abcmc/kernels.hpp"
#include "abcmc/proposals.hpp"

namespace abcmc {

LVParams LVParams::from_point(const ParamPoint& p) {
    if (p.is_integer() || p.coords().size() != 3) throw DimensionMismatch("Lotka-Volterra parameters are 3 reals");
    return {p.coord(0), p.coord(1), p.coord(2)};
}

void LVExperimentConfig::validate() const {
    if (!(eps > 0.0)) throw DomainError("lv: eps must be positive");
    if (event_cap < 100'000) throw DomainError("lv: event_cap must be >= 1e5");
    for (double s : step_sd) {
        if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("lv: step_sd entries must be finite and >= 0");
    }
    if (horizon != static_cast<int>(kLVObservations)) throw DomainError("lv: horizon must be 10");
    if (x0[0] < 0 || x0[1] < 0) throw DomainError("lv: initial populations must be >= 0");
    if (race_cap < 1) throw DomainError("lv: race_cap must be >= 1");
}

namespace {

bool within(std::int64_t x1, std::size_t i, double eps) {
    if (x1 <= 0) return false;
    return std::abs(std::log(static_cast<double>(x1)) - std::log(static_cast<double>(kLVData[i]))) <= eps;
}

/// Event-by-event simulation; observe(i, x1) returning false stops early.
template <typename Observe>
LVPath gillespie_core(const LVParams& th, const LVExperimentConfig& cfg, RngStream& rng, std::vector<LVEvent>* events,
                      Observe&& observe, bool& stopped) {
    if (th.theta1 < 0 || th.theta2 < 0 || th.theta3 < 0) throw DomainError("lv: rates must be nonnegative");
    LVPath path;
    stopped = false;
    std::int64_t x1 = cfg.x0[0], x2 = cfg.x0[1];
    double t = 0.0;
    std::size_t obs = 0;
    auto record_until = [&](double t_next) {
        while (obs < kLVObservations && static_cast<double>(obs + 1) <= t_next) {
            path.x1[obs] = x1;
            if (!observe(obs, x1)) {
                stopped = true;
                return;
            }
            ++obs;
        }
    };
    while (obs < kLVObservations) {
        const double r1 = th.theta1 * static_cast<double>(x1);
        const double r2 = th.theta2 * static_cast<double>(x1) * static_cast<double>(x2);
        const double r3 = th.theta3 * static_cast<double>(x2);
        const double total = r1 + r2 + r3;
        if (!(total > 0.0)) {
            record_until(INFINITY);
            break;
        }
        const double t_next = t + rng.exponential(total);
        record_until(t_next);
        if (stopped || obs == kLVObservations) break;
        if (path.event_count >= cfg.event_cap) {
            path.truncated = true;
            for (; obs < kLVObservations; ++obs) path.x1[obs] = x1;
            break;
        }
        const double u = rng.uniform() * total;
        LVEvent ev{0, {x1, x2}, {}};
        if (u < r1) {
            ev.reaction = 1;
            ++x1;
        } else if (u < r1 + r2) {
            ev.reaction = 2;
            --x1;
            ++x2;
        } else {
            ev.reaction = 3;
            --x2;
        }
        ev.after = {x1, x2};
        if (events) events->push_back(ev);
        ++path.event_count;
        t = t_next;
    }
    return path;
}

}  // namespace

LVPath gillespie_simulate(const LVParams& theta, const LVExperimentConfig& config, RngStream& rng,
                          std::vector<LVEvent>* events) {
    bool stopped = false;
    return gillespie_core(theta, config, rng, events, [](std::size_t, std::int64_t) { return true; }, stopped);
}

bool lv_hit(const LVPath& path, double eps) {
    if (path.truncated) return false;
    for (std::size_t i = 0; i < kLVObservations; ++i) {
        if (!within(path.x1[i], i, eps)) return false;
    }
    return true;
}

bool gillespie_simulate_hit(const LVParams& theta, const LVExperimentConfig& config, RngStream& rng) {
    bool stopped = false;
    const double eps = config.eps;
    const LVPath path = gillespie_core(
        theta, config, rng, nullptr, [eps](std::size_t i, std::int64_t x1) { return within(x1, i, eps); }, stopped);
    return !stopped && lv_hit(path, eps);
}

LVPath tau_leap_simulate(const LVParams& th, const LVExperimentConfig& cfg, RngStream& rng, double tau) {
    if (!(tau > 0.0 && tau <= 1.0)) throw DomainError("tau_leap_simulate: tau must lie in (0, 1]");
    const auto steps_per_unit = static_cast<std::int64_t>(std::llround(1.0 / tau));
    const double dt = 1.0 / static_cast<double>(steps_per_unit);
    LVPath path;
    std::int64_t x1 = cfg.x0[0], x2 = cfg.x0[1];
    auto draw = [&](double mean) -> std::int64_t {
        if (!(mean > 0.0)) return 0;
        return std::poisson_distribution<std::int64_t>(mean)(rng.engine());
    };
    for (std::size_t obs = 0; obs < kLVObservations; ++obs) {
        for (std::int64_t s = 0; s < steps_per_unit; ++s) {
            const auto n1 = draw(th.theta1 * static_cast<double>(x1) * dt);
            const auto n2 = draw(th.theta2 * static_cast<double>(x1) * static_cast<double>(x2) * dt);
            const auto n3 = draw(th.theta3 * static_cast<double>(x2) * dt);
            path.event_count += static_cast<std::uint64_t>(n1 + n2 + n3);
            x1 = std::max<std::int64_t>(0, x1 + n1 - n2);
            x2 = std::max<std::int64_t>(0, x2 + n2 - n3);
        }
        path.x1[obs] = x1;
    }
    return path;
}

std::array<double, 3> lv_prior_rates(LVPrior prior) {
    return prior == LVPrior::Prior1 ? std::array<double, 3>{1.0, 100.0, 1.0} : std::array<double, 3>{1.0, 0.01, 1.0};
}

LotkaVolterraModel::LotkaVolterraModel(LVExperimentConfig config)
    : config_(config), rates_(lv_prior_rates(config.prior)) {
    config_.validate();
}

double LotkaVolterraModel::prior_density(const ParamPoint& theta) const {
    check_point(theta);
    double log_density = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        const double v = theta.coord(k);
        if (!(v >= 0.0)) return 0.0;
        log_density += std::log(rates_[k]) - rates_[k] * v;
    }
    return floor_density(std::exp(log_density));
}

ParamPoint LotkaVolterraModel::prior_sample(RngStream& rng) const {
    std::vector<double> v(3);
    for (std::size_t k = 0; k < 3; ++k) v[k] = rng.exponential(rates_[k]);
    return ParamPoint::real(std::move(v));
}

PseudoData LotkaVolterraModel::simulate(const ParamPoint& theta, RngStream& rng) const {
    check_point(theta);
    const LVPath path = gillespie_simulate(LVParams::from_point(theta), config_, rng);
    PseudoData x(path.x1.begin(), path.x1.end());
    x.push_back(path.truncated ? 1.0 : 0.0);
    return x;
}

bool LotkaVolterraModel::hit(const PseudoData& x) const {
    if (x.size() != kLVObservations + 1) throw DimensionMismatch("lv: pseudo-data has the wrong length");
    LVPath path;
    for (std::size_t i = 0; i < kLVObservations; ++i) path.x1[i] = static_cast<std::int64_t>(x[i]);
    path.truncated = x[kLVObservations] != 0.0;
    return lv_hit(path, config_.eps);
}

bool LotkaVolterraModel::simulate_hit(const ParamPoint& theta, RngStream& rng) const {
    check_point(theta);
    return gillespie_simulate_hit(LVParams::from_point(theta), config_, rng);
}

std::string LVKernelChoice::label() const {
    switch (kind) {
        case LVKernelKind::PM1: return "PM1(" + std::to_string(n) + ")";
        case LVKernelKind::PM2: return "PM2(" + std::to_string(n) + ")";
        case LVKernelKind::OneHit: return "OneHit";
    }
    return "?";
}

LVKernelChoice parse_lv_kernel(const std::string& text) {
    if (text == "OneHit") return {LVKernelKind::OneHit, 0};
    for (auto [prefix, kind] : {std::pair{"PM1(", LVKernelKind::PM1}, std::pair{"PM2(", LVKernelKind::PM2}}) {
        const std::string p(prefix);
        if (text.rfind(p, 0) == 0 && text.size() > p.size() + 1 && text.back() == ')') {
            const std::string digits = text.substr(p.size(), text.size() - p.size() - 1);
            if (digits.find_first_not_of("0123456789") == std::string::npos) {
                const auto n = std::stoul(digits);
                if (n >= 1) return {kind, n};
            }
        }
    }
    throw DomainError("unknown lv kernel '" + text + "' (expected PM1(N), PM2(N) or OneHit)");
}

LVExperimentResult lv_experiment(const LVExperimentConfig& config, const LVKernelChoice& choice,
                                 std::size_t iterations, RngStream& rng) {
    if (iterations < 1) throw DomainError("lv_experiment needs iterations >= 1");
    auto model = std::make_shared<const LotkaVolterraModel>(config);
    auto proposal = std::make_shared<const GaussianRandomWalk>(
        std::vector<double>(config.step_sd.begin(), config.step_sd.end()));
    const ParamPoint theta0 = config.theta0.to_point();
    if (model->prior_density(theta0) <= 0.0) throw DomainError("lv: theta0 must have positive prior density");

    KernelPtr kernel;
    KernelState initial = PlainState{theta0};
    switch (choice.kind) {
        case LVKernelKind::PM1:
            kernel = std::make_shared<PseudoMarginalKernel>(model, proposal, choice.n);
            initial = initialize_pseudo_marginal(theta0, *model, choice.n, rng);
            break;
        case LVKernelKind::PM2:
            kernel = std::make_shared<TwoSidedPseudoMarginalKernel>(model, proposal, choice.n);
            break;
        case LVKernelKind::OneHit:
            kernel = std::make_shared<OneHitKernel>(model, proposal, config.race_cap);
            break;
    }

    LVExperimentResult out;
    out.trace = run_chain(*kernel, std::move(initial), iterations, rng).trace;

    CsvWriter csv({"iteration", "theta1", "theta2", "theta3", "accepted", "sims_used", "running_mean_theta2",
                   "running_mean_theta3", "running_tail_179", "running_tail_200"});
    double s2 = 0, s3 = 0, tail179 = 0, tail200 = 0;
    for (std::size_t i = 0; i < out.trace.size(); ++i) {
        const auto& th = out.trace.states[i];
        const double k = static_cast<double>(i + 1);
        s2 += th.coord(1);
        s3 += th.coord(2);
        tail179 += th.coord(2) >= 1.79 ? 1.0 : 0.0;
        tail200 += th.coord(2) >= 2.0 ? 1.0 : 0.0;
        csv.cell(i + 1).cell(th.coord(0)).cell(th.coord(1)).cell(th.coord(2));
        csv.cell(static_cast<int>(out.trace.accepted[i])).cell(static_cast<unsigned long long>(out.trace.sims_used[i]));
        csv.cell(s2 / k).cell(s3 / k).cell(tail179 / k).cell(tail200 / k);
        csv.end_row();
    }
    out.csv = csv.str();
    return out;
}

}  // namespace abcmc
