#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "abcmc/config.hpp"
#include "abcmc/errors.hpp"
#include "abcmc/finite_chain.hpp"
#include "abcmc/runner.hpp"

namespace {

void report_error(const std::string& kind, const std::string& message, const abcmc::Error* err = nullptr) {
    nlohmann::json rec{{"error", kind}, {"message", message}};
    if (const auto* ce = dynamic_cast<const abcmc::ConfigError*>(err)) rec["field"] = ce->field();
    if (err && err->iteration()) rec["iteration"] = *err->iteration();
    std::cerr << rec.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ABC Markov chain kernels: exact-chain analysis and simulation pipelines"};
    app.require_subcommand(1);
    app.set_version_flag("--version", abcmc::library_version());

    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    auto* run = app.add_subcommand("run", "run the pipeline named in a config file");
    run->add_option("config", config_path, "experiment config (TOML subset)")->required();
    run->add_option("--out", out_dir, "output directory (overrides output_dir)");
    run->add_option("--seed", seed, "master seed (overrides seed)");
    run->add_option("--threads", threads, "worker threads, capped by $ABCMC_THREADS")->check(CLI::PositiveNumber);

    std::string chain_path;
    std::size_t tv_steps = 100;
    auto* analyze = app.add_subcommand("analyze-chain", "spectral summary of a chain CSV");
    analyze->add_option("chain", chain_path, "CSV with header state,pi,p0,...")->required();
    analyze->add_option("--tv-steps", tv_steps, "print worst-start TV for m = 1..N")->check(CLI::PositiveNumber);
    bool print_tv = false;
    analyze->add_flag("--tv", print_tv, "also print the TV table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            const auto cfg = abcmc::load_experiment_config(config_path);
            const auto report = abcmc::run_experiment(cfg, {out_dir, seed, threads});
            for (const auto& f : report.files) std::cout << f << "\n";
            std::cout << report.manifest_path << "\n";
        } else if (*analyze) {
            const auto chain = abcmc::read_chain_csv(chain_path);
            std::cout << abcmc::chain_summary_csv(chain);
            if (print_tv) std::cout << abcmc::chain_tv_csv(chain, tv_steps);
        }
    } catch (const abcmc::ConfigError& e) {
        report_error("config", e.what(), &e);
        return 2;
    } catch (const abcmc::Error& e) {
        report_error("runtime", e.what(), &e);
        return 1;
    } catch (const std::exception& e) {
        report_error("runtime", e.what());
        return 1;
    }
    return 0;
}
