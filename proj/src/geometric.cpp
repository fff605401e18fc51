#include "abcmc/geometric.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "abcmc/acceptance.hpp"
#include "abcmc/csv.hpp"
#include "abcmc/errors.hpp"
#include "abcmc/parallel.hpp"

namespace abcmc {

void GeometricExampleSpec::validate() const {
    if (!(a > 0.0 && a < 1.0)) throw DomainError("geometric example: a must lie in (0, 1)");
    if (!(b > 0.0 && b < 1.0)) throw DomainError("geometric example: b must lie in (0, 1)");
    if (D < 2) throw DomainError("geometric example: D must be >= 2");
}

GeometricModel::GeometricModel(double a, double b, std::optional<int> truncation)
    : a_(a), b_(b), truncation_(truncation) {
    GeometricExampleSpec{a, b, truncation.value_or(2)}.validate();
}

double GeometricModel::prior_density(const ParamPoint& theta) const {
    check_point(theta);
    const auto t = theta.as_integer();
    if (t < 1 || (truncation_ && t > *truncation_)) return 0.0;
    return floor_density((1.0 - a_) * std::pow(a_, static_cast<double>(t - 1)));
}

ParamPoint GeometricModel::prior_sample(RngStream& rng) const {
    const double u = rng.uniform_open();
    double t;
    if (truncation_) {
        const double mass = 1.0 - std::pow(a_, *truncation_);
        t = std::ceil(std::log1p(-u * mass) / std::log(a_));
        t = std::clamp(t, 1.0, static_cast<double>(*truncation_));
    } else {
        t = std::max(1.0, std::ceil(std::log(u) / std::log(a_)));
    }
    return ParamPoint::integer(static_cast<std::int64_t>(t));
}

PseudoData GeometricModel::simulate(const ParamPoint& theta, RngStream& rng) const {
    return {rng.uniform() < exact_hit_prob(theta) ? 1.0 : 0.0};
}

double GeometricModel::exact_hit_prob(const ParamPoint& theta) const {
    check_point(theta);
    const auto t = theta.as_integer();
    return t < 0 ? 0.0 : std::pow(b_, static_cast<double>(t));
}

std::string KernelChoice::label() const {
    switch (kind) {
        case KernelKind::MH: return "MH";
        case KernelKind::OneHit: return "OneHit";
        case KernelKind::PM2: return "PM2";
    }
    return "?";
}

KernelChoice parse_kernel_choice(const std::string& text) {
    if (text == "MH") return {KernelKind::MH, 0};
    if (text == "OneHit") return {KernelKind::OneHit, 0};
    std::string digits;
    if (text.rfind("PM2(", 0) == 0 && text.size() > 5 && text.back() == ')') {
        digits = text.substr(4, text.size() - 5);
    } else if (text.rfind("PM2_", 0) == 0) {
        digits = text.substr(4);
    }
    if (!digits.empty() && std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        const auto n = std::stoul(digits);
        if (n >= 1) return {KernelKind::PM2, static_cast<std::uint32_t>(n)};
    }
    throw DomainError("unknown kernel '" + text + "' (expected MH, OneHit or PM2(N))");
}

double nR_closed(double a, double b) {
    if (!(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0)) throw DomainError("nR_closed needs a, b in (0, 1)");
    return (1.0 - a * b) / (b * (1.0 - a));
}

CostBounds n_bounds(double a, double b) {
    if (!(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0)) throw DomainError("n_bounds needs a, b in (0, 1)");
    const double half = (1.0 - a * b) / 2.0;
    return {half * ((a + b) / (b * (1.0 - a) * (1.0 + b)) - 1.0), half * ((a + b) / (b * (1.0 - a)) - 1.0)};
}

Eigen::VectorXd geometric_stationary(const GeometricExampleSpec& spec) {
    spec.validate();
    Eigen::VectorXd pi(spec.D);
    const double r = spec.a * spec.b;
    for (int i = 0; i < spec.D; ++i) pi(i) = std::pow(r, i);
    return pi / pi.sum();
}

double n_exact(const GeometricExampleSpec& spec) {
    spec.validate();
    // pi(t) / h(t) = a^{t-1} / (b Z) stays finite where b^t underflows
    const double ab = spec.a * spec.b;
    const double log_z = std::log1p(-std::pow(ab, spec.D)) - std::log1p(-ab);
    double n = 0.0;
    for (int t = 1; t <= spec.D; ++t) {
        const double pi_over_h = std::exp((t - 1) * std::log(spec.a) - std::log(spec.b) - log_z);
        double rounds = 0.0;
        for (int v : {t - 1, t + 1}) {
            if (v < 1 || v > spec.D) continue;
            const double accept_stage = std::min(1.0, std::pow(spec.a, v - t));
            // h(t) + h(v) (1 - h(t)) = h(t) (1 + b^{v-t} - h(v))
            rounds += 0.5 * accept_stage / (1.0 + std::pow(spec.b, v - t) - std::pow(spec.b, v));
        }
        n += pi_over_h * rounds;
    }
    return n;
}

FiniteChain build_geometric_chain(const GeometricExampleSpec& spec, const KernelChoice& kernel) {
    spec.validate();
    const int D = spec.D;
    std::vector<ParamPoint> states;
    states.reserve(static_cast<std::size_t>(D));
    for (int t = 1; t <= D; ++t) states.push_back(ParamPoint::integer(t));

    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(D, D);
    for (int i = 0; i < D; ++i) {
        if (i > 0) q(i, i - 1) = 0.5;
        if (i + 1 < D) q(i, i + 1) = 0.5;
    }

    auto h = [&](std::size_t i) { return std::pow(spec.b, static_cast<double>(i + 1)); };
    auto c_ratio = [&](std::size_t i, std::size_t j) {
        return std::pow(spec.a, static_cast<double>(j) - static_cast<double>(i));
    };
    AcceptanceFn alpha;
    switch (kernel.kind) {
        case KernelKind::MH:
            alpha = [&](std::size_t i, std::size_t j) { return alpha_mh(h(i), h(j), c_ratio(i, j)); };
            break;
        case KernelKind::OneHit:
            alpha = [&](std::size_t i, std::size_t j) { return alpha_onehit(h(i), h(j), c_ratio(i, j)); };
            break;
        case KernelKind::PM2:
            if (kernel.n == 0) throw DomainError("PM2 needs N >= 1");
            alpha = [&](std::size_t i, std::size_t j) { return alpha_pm2_exact(h(i), h(j), c_ratio(i, j), kernel.n); };
            break;
    }
    return build_finite_kernel(std::move(states), q, alpha, geometric_stationary(spec));
}

std::vector<std::pair<KernelChoice, FiniteChain>> build_geometric_chains(const GeometricExampleSpec& spec,
                                                                          const std::vector<KernelChoice>& kernels) {
    std::vector<std::pair<KernelChoice, FiniteChain>> out;
    out.reserve(kernels.size());
    for (const auto& k : kernels) out.emplace_back(k, build_geometric_chain(spec, k));
    return out;
}

std::vector<double> TestFunctions::phi3(int t) const {
    std::vector<double> out(static_cast<std::size_t>(D));
    for (int theta = 1; theta <= D; ++theta) out[static_cast<std::size_t>(theta - 1)] = theta >= t ? 1.0 : 0.0;
    return out;
}

TestFunctions test_functions(const GeometricExampleSpec& spec) {
    spec.validate();
    TestFunctions tf;
    tf.D = spec.D;
    const double log_ab = std::log(spec.a * spec.b);
    for (int theta = 1; theta <= spec.D; ++theta) {
        tf.phi1.push_back(theta);
        tf.phi2.push_back(std::exp(-theta / 2.1 * log_ab));
    }
    return tf;
}

double tail_probability_untruncated(double a, double b, int t) {
    if (t <= 1) return 1.0;
    return std::pow(a * b, t - 1);
}

namespace {

struct Row {
    KernelChoice kernel;
    double a;
    double b;
    int x;
    double value;
};

void append_rows(CsvWriter& csv, const std::vector<Row>& rows) {
    for (const auto& r : rows) {
        csv.cell(std::string_view(r.kernel.label())).cell(static_cast<long long>(r.kernel.n)).cell(r.a).cell(r.b);
        csv.cell(static_cast<long long>(r.x)).cell(r.value);
        csv.end_row();
    }
}

const std::vector<std::string> kFigureHeader{"kernel", "N", "a", "b", "x", "value"};

}  // namespace

std::vector<std::pair<std::string, std::string>> figure_tables(const FigureGrid& grid, unsigned threads) {
    // Cells over (b, D) feed the gap and variance families.
    struct Cell {
        double b;
        int D;
        std::vector<Row> gap, var1, var2;
    };
    std::vector<Cell> cells;
    for (double b : grid.b_values) {
        for (int D : grid.d_grid) cells.push_back({b, D, {}, {}, {}});
    }
    parallel_for(cells.size(), threads, [&](std::size_t k) {
        Cell& cell = cells[k];
        const GeometricExampleSpec spec{grid.a, cell.b, cell.D};
        const TestFunctions tf = test_functions(spec);
        for (const auto& [kernel, chain] : build_geometric_chains(spec, grid.kernels)) {
            const auto summary = spectral_summary(chain);
            cell.gap.push_back({kernel, grid.a, cell.b, cell.D, summary.gap_ge});
            cell.var1.push_back({kernel, grid.a, cell.b, cell.D, std::log(asymptotic_variance(chain, tf.phi1))});
            cell.var2.push_back({kernel, grid.a, cell.b, cell.D, std::log(asymptotic_variance(chain, tf.phi2))});
        }
    });

    std::vector<std::vector<Row>> tail(grid.b_values.size());
    parallel_for(grid.b_values.size(), threads, [&](std::size_t k) {
        const GeometricExampleSpec spec{grid.a, grid.b_values[k], grid.tail_D};
        const TestFunctions tf = test_functions(spec);
        const Eigen::VectorXd pi = geometric_stationary(spec);
        for (const auto& [kernel, chain] : build_geometric_chains(spec, grid.kernels)) {
            for (int t : grid.t_grid) {
                const auto phi = tf.phi3(t);
                const double mass = pi.dot(Eigen::Map<const Eigen::VectorXd>(phi.data(), spec.D));
                const double rel = asymptotic_variance(chain, phi) / mass;
                tail[k].push_back({kernel, grid.a, grid.b_values[k], t, std::log(rel)});
            }
        }
    });

    struct VaryCell {
        double a;
        int D;
        std::vector<Row> rows;
    };
    std::vector<VaryCell> vary;
    for (double a : grid.a_values_vary) {
        for (int D : grid.d_grid) vary.push_back({a, D, {}});
    }
    parallel_for(vary.size(), threads, [&](std::size_t k) {
        VaryCell& cell = vary[k];
        const GeometricExampleSpec spec{cell.a, grid.b_vary, cell.D};
        const TestFunctions tf = test_functions(spec);
        for (const auto& [kernel, chain] : build_geometric_chains(spec, grid.kernels)) {
            cell.rows.push_back({kernel, cell.a, grid.b_vary, cell.D, std::log(asymptotic_variance(chain, tf.phi1))});
        }
    });

    CsvWriter gap(kFigureHeader), var1(kFigureHeader), var2(kFigureHeader), rel(kFigureHeader), va(kFigureHeader);
    for (const auto& c : cells) {
        append_rows(gap, c.gap);
        append_rows(var1, c.var1);
        append_rows(var2, c.var2);
    }
    for (const auto& rows : tail) append_rows(rel, rows);
    for (const auto& c : vary) append_rows(va, c.rows);

    return {{"spectral_gap.csv", gap.str()},
            {"log_var_phi1.csv", var1.str()},
            {"log_var_phi2.csv", var2.str()},
            {"log_rel_var_tail.csv", rel.str()},
            {"log_var_phi1_vary_a.csv", va.str()}};
}

std::vector<std::string> figure_pipeline(const FigureGrid& grid, const std::string& output_dir, unsigned threads) {
    std::vector<std::string> written;
    for (const auto& [name, contents] : figure_tables(grid, threads)) {
        const auto path = (std::filesystem::path(output_dir) / name).string();
        write_file_atomic(path, contents);
        written.push_back(path);
    }
    return written;
}

}  // namespace abcmc
