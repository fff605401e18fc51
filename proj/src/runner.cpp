#include "abcmc/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <memory>

#include "json.hpp"

#include "abcmc/compact.hpp"
#include "abcmc/csv.hpp"
#include "abcmc/errors.hpp"
#include "abcmc/estimators.hpp"
#include "abcmc/geometric.hpp"
#include "abcmc/kernels.hpp"
#include "abcmc/lotka_volterra.hpp"
#include "abcmc/parallel.hpp"
#include "abcmc/proposals.hpp"

namespace abcmc {

std::string library_version() { return ABCMC_VERSION; }

unsigned effective_threads(unsigned requested) {
    unsigned n = std::max(1u, requested);
    if (const char* env = std::getenv(kThreadsEnv)) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && cap > 0) n = std::min(n, static_cast<unsigned>(cap));
    }
    return n;
}

namespace {

using Outputs = std::vector<std::pair<std::string, std::string>>;

std::string file_safe(std::string label) {
    for (char& c : label) {
        if (c == '(' || c == ')') c = '_';
    }
    while (!label.empty() && label.back() == '_') label.pop_back();
    return label;
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe sample_mean(const std::vector<ParamPoint>& points, std::size_t coord) {
    MeanSe out;
    if (points.empty()) return out;
    const double n = static_cast<double>(points.size());
    for (const auto& p : points) out.mean += p.coord(coord);
    out.mean /= n;
    if (points.size() > 1) {
        double ss = 0.0;
        for (const auto& p : points) ss += (p.coord(coord) - out.mean) * (p.coord(coord) - out.mean);
        out.se = std::sqrt(ss / (n - 1.0) / n);
    }
    return out;
}

Outputs run_geometric(const ExperimentConfig& cfg, unsigned threads) { return figure_tables(cfg.geometric, threads); }

Outputs run_compact(const ExperimentConfig& cfg, unsigned threads) {
    const auto& spec = cfg.compact.spec;
    const auto chains = compact_two_block_chains(spec);
    auto model = std::make_shared<const CompactModel>(spec);
    auto flip = std::make_shared<const TwoBlockFlip>();
    const std::vector<KernelPtr> kernels{std::make_shared<MetropolisHastingsKernel>(model, flip),
                                         std::make_shared<OneHitKernel>(model, flip)};
    const RngStream master(cfg.seed);
    std::vector<CostSummary> costs(kernels.size());
    parallel_for(kernels.size(), threads, [&](std::size_t k) {
        RngStream rng = master.split(k);
        const auto run = run_chain(*kernels[k], PlainState{ParamPoint::real({0.25})}, cfg.compact.iterations, rng);
        costs[k] = cost_summary(run.trace, 1.0 / spec.b);
    });

    CsvWriter csv({"kernel", "a", "b", "alpha", "gap_vb", "gap_ge", "H_inv", "n_hat", "n_hat_se", "acceptance_rate"});
    for (std::size_t k = 0; k < chains.size(); ++k) {
        const auto& [name, chain] = chains[k];
        const auto s = spectral_summary(chain);
        csv.cell(std::string_view(name)).cell(spec.a).cell(spec.b).cell(chain.P(0, 1)).cell(s.gap_vb).cell(s.gap_ge);
        csv.cell(compact_inverse_hit_rate(spec)).cell(costs[k].n_hat).cell(costs[k].n_hat_se);
        csv.cell(costs[k].acceptance_rate);
        csv.end_row();
    }
    return {{"compact_summary.csv", csv.str()}};
}

Outputs run_lv(const ExperimentConfig& cfg, unsigned threads) {
    const auto& lv = cfg.lv;
    const RngStream master(cfg.seed);
    std::vector<LVExperimentResult> results(lv.kernels.size());
    parallel_for(lv.kernels.size(), threads, [&](std::size_t k) {
        RngStream rng = master.split(k);
        results[k] = lv_experiment(lv.lv, lv.kernels[k], lv.iterations, rng);
    });

    Outputs out;
    CsvWriter summary({"kernel", "iterations", "n_hat", "n_hat_se", "sims_per_iteration", "acceptance_rate",
                       "mean_theta3", "mean_theta3_se", "tail_179", "tail_200"});
    auto theta3 = [](const ParamPoint& p) { return p.coord(2); };
    for (std::size_t k = 0; k < lv.kernels.size(); ++k) {
        const auto& trace = results[k].trace;
        out.emplace_back("lv_" + file_safe(lv.kernels[k].label()) + ".csv", results[k].csv);
        const auto cost = cost_summary(trace);
        const std::size_t batches = std::min<std::size_t>(kDefaultBatches, std::max<std::size_t>(2, trace.size() / 2));
        const auto bm = trace.size() >= 4 ? batch_means_variance(trace, theta3, batches) : BatchMeans{};
        const auto tail = [&](double t) {
            return ergodic_average(trace, [t](const ParamPoint& p) { return p.coord(2) >= t ? 1.0 : 0.0; }, 0);
        };
        summary.cell(std::string_view(lv.kernels[k].label())).cell(trace.size()).cell(cost.n_hat).cell(cost.n_hat_se);
        summary.cell(cost.sims_per_iteration).cell(cost.acceptance_rate).cell(ergodic_average(trace, theta3, 0));
        summary.cell(bm.std_error).cell(tail(1.79)).cell(tail(2.0));
        summary.end_row();
    }
    out.emplace_back("lv_summary.csv", summary.str());

    if (lv.rejection_accepts > 0) {
        RngStream rng = master.split(lv.kernels.size());
        const LotkaVolterraModel model(lv.lv);
        const auto rej = rejection_sample(model, lv.rejection_accepts, rng, lv.rejection_cap);
        const auto m3 = sample_mean(rej.samples, 2);
        CsvWriter csv({"accepts", "proposals", "H_hat", "H_hat_se", "mean_theta3", "mean_theta3_se"});
        csv.cell(rej.samples.size()).cell(static_cast<unsigned long long>(rej.proposals_used)).cell(rej.H_hat);
        csv.cell(rej.H_hat_se).cell(m3.mean).cell(m3.se);
        csv.end_row();
        out.emplace_back("lv_rejection.csv", csv.str());
    }
    return out;
}

Outputs run_analyze(const ExperimentConfig& cfg) {
    const FiniteChain chain = read_chain_csv(cfg.analyze.input);
    return {{"chain_summary.csv", chain_summary_csv(chain)}, {"chain_tv.csv", chain_tv_csv(chain, cfg.analyze.tv_steps)}};
}

Outputs run_rejection(const ExperimentConfig& cfg) {
    const auto& rc = cfg.rejection;
    std::unique_ptr<GenerativeModel> model;
    std::optional<double> closed_nR;
    switch (rc.model) {
        case RejectionModel::Geometric:
            model = std::make_unique<GeometricModel>(rc.a, rc.b, rc.D);
            if (!rc.D) closed_nR = nR_closed(rc.a, rc.b);
            break;
        case RejectionModel::Compact:
            model = std::make_unique<CompactModel>(CompactExampleSpec{rc.a, rc.b});
            closed_nR = compact_inverse_hit_rate({rc.a, rc.b});
            break;
        case RejectionModel::LotkaVolterra:
            model = std::make_unique<LotkaVolterraModel>(rc.lv);
            break;
    }
    RngStream rng = RngStream(cfg.seed).split(0);
    const auto rej = rejection_sample(*model, rc.target_accepts, rng, rc.proposal_cap);

    std::vector<std::string> header{"index"};
    const std::size_t d = model->dimension().integer ? 0 : model->dimension().size;
    if (d <= 1) {
        header.emplace_back("theta");
    } else {
        for (std::size_t k = 0; k < d; ++k) header.push_back("theta" + std::to_string(k + 1));
    }
    CsvWriter samples(header);
    for (std::size_t i = 0; i < rej.samples.size(); ++i) {
        samples.cell(i + 1);
        const auto& s = rej.samples[i];
        if (s.is_integer()) {
            samples.cell(static_cast<long long>(s.as_integer()));
        } else {
            for (double c : s.coords()) samples.cell(c);
        }
        samples.end_row();
    }
    CsvWriter summary({"accepts", "proposals", "H_hat", "H_hat_se", "proposals_per_accept", "nR_closed"});
    summary.cell(rej.samples.size()).cell(static_cast<unsigned long long>(rej.proposals_used)).cell(rej.H_hat);
    summary.cell(rej.H_hat_se).cell(static_cast<double>(rej.proposals_used) / static_cast<double>(rej.samples.size()));
    if (closed_nR) {
        summary.cell(*closed_nR);
    } else {
        summary.cell(std::string_view(""));
    }
    summary.end_row();
    return {{"rejection_samples.csv", samples.str()}, {"rejection_summary.csv", summary.str()}};
}

}  // namespace

std::string chain_summary_csv(const FiniteChain& chain) {
    validate_chain(chain);
    const auto s = spectral_summary(chain);
    CsvWriter csv({"metric", "value"});
    auto row = [&](std::string_view name, double v) {
        csv.cell(name).cell(v);
        csv.end_row();
    };
    row("states", static_cast<double>(chain.size()));
    row("gap_vb", s.gap_vb);
    row("gap_ge", s.gap_ge);
    row("lambda_star", s.lambda_star());
    row("lambda_2", s.eigenvalues.size() > 1 ? s.eigenvalues[1] : 0.0);
    row("lambda_min", s.eigenvalues.back());
    row("pi_min", s.pi_min);
    if (chain.size() <= kConductanceStateLimit) row("conductance", conductance_exact(chain).kappa);
    return csv.str();
}

std::string chain_tv_csv(const FiniteChain& chain, std::size_t m_max) {
    const auto s = spectral_summary(chain);
    const auto tv = tv_curve_worst(chain, m_max);
    CsvWriter csv({"m", "tv_worst", "lower", "upper"});
    for (std::size_t m = 1; m <= tv.size(); ++m) {
        const auto b = tv_bounds_mt(s, m);
        csv.cell(m).cell(tv[m - 1]).cell(b.lower).cell(b.upper);
        csv.end_row();
    }
    return csv.str();
}

RunReport run_experiment(ExperimentConfig config, const RunOverrides& overrides) {
    if (overrides.output_dir) config.output_dir = *overrides.output_dir;
    if (overrides.seed) config.seed = *overrides.seed;
    if (overrides.threads) config.threads = *overrides.threads;
    const unsigned threads = effective_threads(config.threads);

    const auto started = std::chrono::steady_clock::now();
    Outputs outputs;
    switch (config.experiment) {
        case ExperimentKind::GeometricFigures: outputs = run_geometric(config, threads); break;
        case ExperimentKind::Compact: outputs = run_compact(config, threads); break;
        case ExperimentKind::LotkaVolterra: outputs = run_lv(config, threads); break;
        case ExperimentKind::AnalyzeChain: outputs = run_analyze(config); break;
        case ExperimentKind::Rejection: outputs = run_rejection(config); break;
    }

    RunReport report;
    report.output_dir = config.output_dir;
    nlohmann::json files = nlohmann::json::array();
    for (const auto& [name, contents] : outputs) {
        const auto path = (std::filesystem::path(config.output_dir) / name).string();
        write_file_atomic(path, contents);
        report.files.push_back(path);
        files.push_back({{"name", name}, {"bytes", contents.size()}, {"sha256", sha256_hex(contents)}});
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    nlohmann::json manifest;
    manifest["experiment"] = experiment_name(config.experiment);
    manifest["seed"] = config.seed;
    manifest["threads"] = threads;
    manifest["version"] = library_version();
    manifest["wall_time_seconds"] = wall;
    manifest["config"] = config.source;
    manifest["files"] = files;
    report.manifest_path = (std::filesystem::path(config.output_dir) / "manifest.json").string();
    write_file_atomic(report.manifest_path, manifest.dump(2) + "\n");
    return report;
}

}  // namespace abcmc
