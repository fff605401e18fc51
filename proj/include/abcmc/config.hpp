#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "abcmc/compact.hpp"
#include "abcmc/geometric.hpp"
#include "abcmc/lotka_volterra.hpp"

namespace abcmc {

/// A TOML-style scalar or (possibly nested) array.
struct ConfigValue {
    using Array = std::vector<ConfigValue>;
    std::variant<bool, std::int64_t, double, std::string, Array> v;
};

/// Sections in file order; top-level keys live under "".
struct ConfigDocument {
    std::map<std::string, std::map<std::string, ConfigValue>> sections;
};

/// Parses the subset: [section] headers, key = value, strings, integers,
/// floats, booleans, arrays (may span lines), # comments. Duplicate keys
/// and sections are errors.
ConfigDocument parse_config_document(const std::string& text);

enum class ExperimentKind { GeometricFigures, Compact, LotkaVolterra, AnalyzeChain, Rejection };

std::string experiment_name(ExperimentKind kind);

struct CompactRunConfig {
    CompactExampleSpec spec;
    std::size_t iterations = 100'000;
};

struct LVRunConfig {
    LVExperimentConfig lv;
    std::vector<LVKernelChoice> kernels{{LVKernelKind::OneHit, 0}};
    std::size_t iterations = 20'000;
    /// When > 0, also draw this many rejection-sampler accepts.
    std::size_t rejection_accepts = 0;
    std::uint64_t rejection_cap = UINT64_MAX;
};

struct AnalyzeRunConfig {
    std::string input;
    std::size_t tv_steps = 100;
};

enum class RejectionModel { Geometric, Compact, LotkaVolterra };

struct RejectionRunConfig {
    RejectionModel model = RejectionModel::Geometric;
    double a = 0.5;
    double b = 0.5;
    std::optional<int> D;
    LVExperimentConfig lv;
    std::size_t target_accepts = 10'000;
    std::uint64_t proposal_cap = UINT64_MAX;
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::GeometricFigures;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    unsigned threads = 1;

    FigureGrid geometric;
    CompactRunConfig compact;
    LVRunConfig lv;
    AnalyzeRunConfig analyze;
    RejectionRunConfig rejection;

    /// The configuration text as read, echoed into the manifest.
    std::string source;
};

/// Top level: experiment (string), seed (integer, required), output_dir,
/// threads. One optional section named after the experiment holds its
/// parameters. Unknown keys, unknown sections and out-of-range values
/// throw ConfigError naming the field.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

}  // namespace abcmc
