#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"

#include "abcmc/config.hpp"
#include "abcmc/csv.hpp"
#include "abcmc/errors.hpp"
#include "abcmc/geometric.hpp"
#include "abcmc/runner.hpp"

using namespace abcmc;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("abcmc_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string field_of(const std::string& text) {
    try {
        parse_experiment_config(text);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "<no error>";
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(ABCMC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("document parser") {
    const auto doc = parse_config_document(R"(
# top
experiment = "compact"   # trailing
seed = 42
flag = true
x = -1.5e-3
list = [1, 2,
        3]
nested = [[1, 2], [3]]
[compact]
a = 2.0
)");
    const auto& top = doc.sections.at("");
    CHECK(std::get<std::string>(top.at("experiment").v) == "compact");
    CHECK(std::get<std::int64_t>(top.at("seed").v) == 42);
    CHECK(std::get<bool>(top.at("flag").v));
    CHECK(std::get<double>(top.at("x").v) == -1.5e-3);
    CHECK(std::get<ConfigValue::Array>(top.at("list").v).size() == 3);
    CHECK(std::get<ConfigValue::Array>(top.at("nested").v).size() == 2);
    CHECK(std::get<double>(doc.sections.at("compact").at("a").v) == 2.0);

    CHECK_THROWS_AS(parse_config_document("a = 1\na = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_document("[s]\n[s]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_document("a = \"open\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_document("a = [1, 2\n"), ConfigError);
}

TEST_CASE("experiment config errors name the field") {
    CHECK(field_of("experiment = \"compact\"\n") == "seed");
    CHECK(field_of("experiment = \"compact\"\nseed = -1\n") == "seed");
    CHECK(field_of("experiment = \"nope\"\nseed = 1\n") == "experiment");
    CHECK(field_of("experiment = \"compact\"\nseed = 1\ncolour = 3\n") == "colour");
    CHECK(field_of("experiment = \"compact\"\nseed = 1\n[compact]\nc = 1\n") == "compact.c");
    CHECK(field_of("experiment = \"compact\"\nseed = 1\n[lv]\n") == "lv");
    CHECK(field_of("experiment = \"geometric-figures\"\nseed = 1\n[geometric-figures]\na = -0.5\n") ==
          "geometric-figures.a");
    CHECK(field_of("experiment = \"lv\"\nseed = 1\n[lv]\neps = 0\n") == "lv.eps");
    CHECK(field_of("experiment = \"lv\"\nseed = 1\n[lv]\nkernels = [\"PM9\"]\n") == "lv.kernels");
    CHECK(field_of("experiment = \"compact\"\nseed = 1\n") == "<no error>");
}

TEST_CASE("config values reach the run structs") {
    const auto cfg = parse_experiment_config(R"cfg(
experiment = "lv"
seed = 7
threads = 3
[lv]
prior = "Prior2"
kernels = ["OneHit", "PM1(15)"]
iterations = 500
theta0 = [1.0, 0.005, 0.6]
)cfg");
    CHECK(cfg.experiment == ExperimentKind::LotkaVolterra);
    CHECK(cfg.seed == 7);
    CHECK(cfg.threads == 3);
    CHECK(cfg.lv.lv.prior == LVPrior::Prior2);
    REQUIRE(cfg.lv.kernels.size() == 2);
    CHECK(cfg.lv.kernels[1].n == 15);
    CHECK(cfg.lv.iterations == 500);
    CHECK(cfg.output_dir == "out");
}

TEST_CASE("missing config file is a config error") {
    CHECK_THROWS_AS(load_experiment_config("/nonexistent/abcmc.toml"), ConfigError);
}

TEST_CASE("runs are byte-identical and the manifest lists every file") {
    const std::string text = R"(
experiment = "compact"
seed = 11
[compact]
a = 3.0
b = 0.5
iterations = 20000
)";
    const auto d1 = scratch_dir("det1"), d2 = scratch_dir("det2");
    auto cfg = parse_experiment_config(text);
    const auto r1 = run_experiment(cfg, {d1.string(), {}, 1});
    const auto r2 = run_experiment(cfg, {d2.string(), {}, 4});
    REQUIRE(r1.files.size() == r2.files.size());
    REQUIRE_FALSE(r1.files.empty());
    for (std::size_t i = 0; i < r1.files.size(); ++i) {
        CHECK(fs::path(r1.files[i]).filename() == fs::path(r2.files[i]).filename());
        CHECK(read_file(r1.files[i]) == read_file(r2.files[i]));
    }

    const auto manifest = nlohmann::json::parse(read_file(r1.manifest_path));
    CHECK(manifest["seed"] == 11);
    CHECK(manifest["experiment"] == "compact");
    CHECK(manifest["version"] == library_version());
    REQUIRE(manifest["files"].size() == r1.files.size());
    for (std::size_t i = 0; i < r1.files.size(); ++i) {
        const auto& entry = manifest["files"][i];
        const auto contents = read_file(r1.files[i]);
        CHECK(entry["name"] == fs::path(r1.files[i]).filename().string());
        CHECK(entry["sha256"] == sha256_hex(contents));
        CHECK(entry["bytes"] == contents.size());
    }

    // a different seed changes the simulated columns
    const auto d3 = scratch_dir("det3");
    const auto r3 = run_experiment(cfg, {d3.string(), 12, {}});
    CHECK(read_file(r3.files[0]) != read_file(r1.files[0]));
}

TEST_CASE("analyze-chain pipeline round-trips a written chain") {
    const auto d = scratch_dir("analyze");
    const auto chain = build_geometric_chain({0.5, 0.5, 6}, {KernelKind::MH, 0});
    const auto path = (d / "chain.csv").string();
    write_chain_csv(chain, path);
    auto cfg = parse_experiment_config("experiment = \"analyze-chain\"\nseed = 0\n[analyze-chain]\ninput = \"" +
                                       path + "\"\ntv_steps = 5\n");
    const auto r = run_experiment(cfg, {(d / "out").string(), {}, {}});
    REQUIRE(r.files.size() == 2);
    const auto tv = parse_csv(read_file(r.files[1]));
    CHECK(tv.size() == 6);
    const auto summary = parse_csv(read_file(r.files[0]));
    CHECK(summary[0] == std::vector<std::string>{"metric", "value"});
}

TEST_CASE("thread cap from the environment") {
    ::setenv(kThreadsEnv, "2", 1);
    CHECK(effective_threads(8) == 2);
    CHECK(effective_threads(1) == 1);
    ::setenv(kThreadsEnv, "junk", 1);
    CHECK(effective_threads(8) == 8);
    ::unsetenv(kThreadsEnv);
    CHECK(effective_threads(5) == 5);
}

TEST_CASE("command-line exit codes") {
    const auto d = scratch_dir("cli");
    const auto bad = d / "bad.toml";
    std::ofstream(bad) << "experiment = \"compact\"\nseed = 1\n[compact]\na = 0.5\n";
    CHECK(run_cli("run " + bad.string()) == 2);
    CHECK(run_cli("run " + (d / "missing.toml").string()) == 2);
    CHECK(run_cli("frobnicate") == 2);
    const auto good = d / "good.toml";
    std::ofstream(good) << "experiment = \"compact\"\nseed = 1\n[compact]\niterations = 100\n";
    CHECK(run_cli("run " + good.string() + " --out " + (d / "o").string()) == 0);
    CHECK(fs::exists(d / "o" / "manifest.json"));
    CHECK(run_cli("analyze-chain " + (d / "missing.csv").string()) == 1);
}

TEST_CASE("shipped configs parse") {
    int seen = 0;
    for (const auto& entry : fs::directory_iterator(ABCMC_CONFIG_DIR)) {
        if (entry.path().extension() != ".toml") continue;
        CAPTURE(entry.path().string());
        CHECK_NOTHROW(load_experiment_config(entry.path().string()));
        ++seen;
    }
    CHECK(seen >= 4);
}
