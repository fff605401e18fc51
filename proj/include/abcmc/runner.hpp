#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "abcmc/config.hpp"
#include "abcmc/finite_chain.hpp"

namespace abcmc {

/// Environment variable capping the worker count of every pipeline.
inline constexpr const char* kThreadsEnv = "ABCMC_THREADS";

std::string library_version();

/// min(requested, $ABCMC_THREADS) when the variable holds a positive integer.
unsigned effective_threads(unsigned requested);

struct RunOverrides {
    std::optional<std::string> output_dir;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
};

struct RunReport {
    std::string output_dir;
    /// Data files in write order; manifest.json is written last and not listed here.
    std::vector<std::string> files;
    std::string manifest_path;
};

/// Runs the configured pipeline and writes its CSVs plus manifest.json.
/// Chain k of a pipeline draws from RngStream(seed).split(k).
RunReport run_experiment(ExperimentConfig config, const RunOverrides& overrides = {});

/// metric,value table for an explicit chain: size, gaps, extreme
/// eigenvalues, pi_min, conductance (up to 20 states).
std::string chain_summary_csv(const FiniteChain& chain);

/// m,tv_worst,lower,upper for m = 1..m_max.
std::string chain_tv_csv(const FiniteChain& chain, std::size_t m_max);

}  // namespace abcmc
