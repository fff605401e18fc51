#include "abcmc/finite_chain.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "abcmc/csv.hpp"
#include "abcmc/errors.hpp"
#include "abcmc/linalg.hpp"

namespace abcmc {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Off-diagonal row sums of P: the probability of leaving each state.
VectorXd escape_probabilities(const MatrixXd& P) {
    VectorXd out(P.rows());
    for (Index i = 0; i < P.rows(); ++i) {
        double s = 0.0;
        for (Index j = 0; j < P.cols(); ++j) {
            if (j != i) s += P(i, j);
        }
        out(i) = s;
    }
    return out;
}

// I - P with the diagonal formed from the escape probabilities, so that
// holding probabilities close to one do not cancel.
MatrixXd laplacian(const MatrixXd& P) {
    MatrixXd L = -P;
    L.diagonal() = escape_probabilities(P);
    return L;
}

bool nearest_neighbour_pattern(const MatrixXd& P) {
    const Index n = P.rows();
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            const auto d = i > j ? i - j : j - i;
            if (d > 1 && P(i, j) != 0.0) return false;
        }
    }
    return true;
}

// pi from detailed balance along the path; entries keep full relative accuracy.
std::optional<VectorXd> birth_death_stationary(const MatrixXd& P) {
    const Index n = P.rows();
    if (!nearest_neighbour_pattern(P)) return std::nullopt;
    VectorXd log_w(n);
    log_w(0) = 0.0;
    for (Index i = 0; i + 1 < n; ++i) {
        if (!(P(i, i + 1) > 0.0) || !(P(i + 1, i) > 0.0)) return std::nullopt;
        log_w(i + 1) = log_w(i) + std::log(P(i, i + 1)) - std::log(P(i + 1, i));
    }
    const double top = log_w.maxCoeff();
    VectorXd pi = (log_w.array() - top).exp().matrix();
    return VectorXd(pi / pi.sum());
}

VectorXd solve_stationary(const MatrixXd& P) {
    const Index n = P.rows();
    // (I - P)^T pi = 0 with the last equation replaced by sum(pi) = 1.
    MatrixXd A = laplacian(P).transpose();
    A.row(n - 1).setOnes();
    VectorXd rhs = VectorXd::Zero(n);
    rhs(n - 1) = 1.0;
    Eigen::FullPivLU<MatrixXd> lu(A);
    if (!lu.isInvertible()) throw NotStationary("stationary distribution is not unique (reducible chain)");
    VectorXd pi = lu.solve(rhs);
    for (Index i = 0; i < n; ++i) {
        if (pi(i) < 0.0 && pi(i) > -1e-14) pi(i) = 0.0;
    }
    return pi;
}

void check_same_states(const std::vector<ParamPoint>& a, const std::vector<ParamPoint>& b) {
    if (a.size() != b.size()) throw StateMismatch("chains have different numbers of states");
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(a[i] == b[i])) throw StateMismatch("chains disagree at state " + std::to_string(i));
    }
}

}  // namespace

void validate_chain(const FiniteChain& chain) {
    const Index n = static_cast<Index>(chain.size());
    if (n == 0) throw DomainError("chain has no states");
    if (chain.P.rows() != n || chain.P.cols() != n || chain.pi.size() != n) {
        throw DomainError("chain dimensions disagree with the state list");
    }
    for (Index i = 0; i < n; ++i) {
        double s = 0.0;
        for (Index j = 0; j < n; ++j) {
            if (!(chain.P(i, j) >= 0.0)) throw DomainError("transition matrix has a negative or NaN entry");
            s += chain.P(i, j);
        }
        if (std::abs(s - 1.0) > kRowSumTol) throw DomainError("row " + std::to_string(i) + " does not sum to 1");
    }
    if ((chain.pi.array() < 0.0).any()) throw NotStationary("stationary vector has a negative entry");
    if (std::abs(chain.pi.sum() - 1.0) > kRowSumTol) throw NotStationary("stationary vector does not sum to 1");
    const VectorXd drift = chain.P.transpose() * chain.pi - chain.pi;
    if (drift.cwiseAbs().maxCoeff() > kStationaryTol) {
        throw NotStationary("pi P differs from pi by " + format_double(drift.cwiseAbs().maxCoeff()));
    }
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            const double flow = chain.pi(i) * chain.P(i, j) - chain.pi(j) * chain.P(j, i);
            if (std::abs(flow) > kReversibilityTol) {
                throw NotReversible("detailed balance fails between states " + std::to_string(i) + " and " +
                                    std::to_string(j));
            }
        }
    }
}

FiniteChain finite_chain_from_matrix(std::vector<ParamPoint> states, MatrixXd P,
                                     std::optional<VectorXd> stationary) {
    const Index n = static_cast<Index>(states.size());
    if (n == 0) throw DomainError("chain has no states");
    if (P.rows() != n || P.cols() != n) throw DomainError("transition matrix size differs from the state count");
    FiniteChain chain{std::move(states), std::move(P), {}};
    if (stationary) {
        chain.pi = *stationary;
    } else if (auto bd = birth_death_stationary(chain.P)) {
        chain.pi = *bd;
    } else {
        chain.pi = solve_stationary(chain.P);
    }
    validate_chain(chain);
    return chain;
}

FiniteChain build_finite_kernel(std::vector<ParamPoint> states, const MatrixXd& proposal,
                                const AcceptanceFn& acceptance, std::optional<VectorXd> stationary) {
    const Index n = static_cast<Index>(states.size());
    if (proposal.rows() != n || proposal.cols() != n) throw DomainError("proposal matrix size differs from the state count");
    MatrixXd P = MatrixXd::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        double row = 0.0;
        double leave = 0.0;
        for (Index j = 0; j < n; ++j) {
            const double q = proposal(i, j);
            if (!(q >= 0.0)) throw DomainError("proposal matrix has a negative entry");
            row += q;
            if (j == i || q == 0.0) continue;
            const double a = acceptance(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            if (!(a >= 0.0 && a <= 1.0)) throw DomainError("acceptance probability outside [0, 1]");
            P(i, j) = q * a;
            leave += P(i, j);
        }
        if (row > 1.0 + kRowSumTol) throw DomainError("proposal row " + std::to_string(i) + " sums above 1");
        P(i, i) = std::max(0.0, 1.0 - leave);
    }
    return finite_chain_from_matrix(std::move(states), std::move(P), std::move(stationary));
}

bool is_birth_death(const FiniteChain& chain) {
    const Index n = chain.P.rows();
    if (n < 2 || !nearest_neighbour_pattern(chain.P)) return false;
    for (Index i = 0; i + 1 < n; ++i) {
        if (!(chain.P(i, i + 1) > 0.0) || !(chain.P(i + 1, i) > 0.0)) return false;
    }
    return true;
}

double birth_death_gap(const FiniteChain& chain) {
    if (!is_birth_death(chain)) throw DomainError("birth_death_gap needs an irreducible birth-death chain");
    const Index n = chain.P.rows();
    const VectorXd pi = *birth_death_stationary(chain.P);

    const Index edges = n - 1;
    VectorXd head(edges), tail(edges), flow(edges);
    double acc = 0.0;
    for (Index e = 0; e < edges; ++e) {
        acc += pi(e);
        head(e) = acc;
    }
    acc = 0.0;
    for (Index e = edges - 1; e >= 0; --e) {
        acc += pi(e + 1);
        tail(e) = acc;
    }
    for (Index e = 0; e < edges; ++e) flow(e) = std::sqrt(pi(e) * chain.P(e, e + 1));

    // Inverse of the edge operator: head(min) tail(max) / sqrt(C_e C_f).
    // Split so the product of two tiny flows never underflows.
    MatrixXd green(edges, edges);
    for (Index e = 0; e < edges; ++e) {
        for (Index f = e; f < edges; ++f) {
            const double g = (head(e) / flow(e)) * (tail(f) / flow(f));
            green(e, f) = g;
            green(f, e) = g;
        }
    }
    const auto eig = jacobi_eigen(green);
    return 1.0 / eig.values.front();
}

SpectralSummary spectral_summary(const FiniteChain& chain) {
    const Index n = static_cast<Index>(chain.size());
    if (n < 2) throw DomainError("spectral summary needs at least two states");
    SpectralSummary out;
    out.pi_min = chain.pi.minCoeff();

    if (n == 2) {
        out.eigenvalues = {1.0, 1.0 - chain.P(0, 1) - chain.P(1, 0)};
    } else {
        // D^{1/2} P D^{-1/2} has entries sqrt(P_ij P_ji) off the diagonal
        // for a reversible P.
        MatrixXd S(n, n);
        for (Index i = 0; i < n; ++i) {
            S(i, i) = chain.P(i, i);
            for (Index j = i + 1; j < n; ++j) {
                const double s = std::sqrt(chain.P(i, j) * chain.P(j, i));
                S(i, j) = s;
                S(j, i) = s;
            }
        }
        out.eigenvalues = jacobi_eigen(S).values;
    }

    const double second = out.eigenvalues[1];
    const double smallest = out.eigenvalues.back();
    out.gap_vb = 1.0 - second;
    if (n > 2 && is_birth_death(chain)) out.gap_vb = birth_death_gap(chain);
    out.gap_vb = std::clamp(out.gap_vb, 0.0, 2.0);
    out.gap_ge = std::clamp(std::min(out.gap_vb, 1.0 + smallest), 0.0, 2.0);
    return out;
}

double asymptotic_variance_birth_death(const FiniteChain& chain, std::span<const double> phi) {
    if (!is_birth_death(chain)) throw DomainError("closed form needs an irreducible birth-death chain");
    const VectorXd pi = *birth_death_stationary(chain.P);
    if (phi.size() != chain.size()) throw DomainError("test function length differs from the state count");
    const Index n = pi.size();
    double mean = 0.0;
    for (Index i = 0; i < n; ++i) mean += pi(i) * phi[static_cast<std::size_t>(i)];
    VectorXd w(n);
    for (Index i = 0; i < n; ++i) w(i) = pi(i) * (phi[static_cast<std::size_t>(i)] - mean);

    // G_e = sum_{i <= e} w_i = -sum_{i > e} w_i; take whichever side
    // accumulates less absolute mass.
    VectorXd head(n - 1), tail(n - 1), head_abs(n - 1), tail_abs(n - 1);
    double s = 0.0, sa = 0.0;
    for (Index e = 0; e + 1 < n; ++e) {
        s += w(e);
        sa += std::abs(w(e));
        head(e) = s;
        head_abs(e) = sa;
    }
    s = 0.0;
    sa = 0.0;
    for (Index e = n - 2; e >= 0; --e) {
        s += w(e + 1);
        sa += std::abs(w(e + 1));
        tail(e) = -s;
        tail_abs(e) = sa;
    }
    double dirichlet = 0.0;
    for (Index e = 0; e + 1 < n; ++e) {
        const double g = head_abs(e) <= tail_abs(e) ? head(e) : tail(e);
        dirichlet += g * g / (pi(e) * chain.P(e, e + 1));
    }
    double var = 0.0;
    for (Index i = 0; i < n; ++i) {
        const double f = phi[static_cast<std::size_t>(i)] - mean;
        var += pi(i) * f * f;
    }
    return 2.0 * dirichlet - var;
}

double asymptotic_variance(const FiniteChain& chain, std::span<const double> phi) {
    if (phi.size() == chain.size() && std::adjacent_find(phi.begin(), phi.end(), std::not_equal_to<>()) == phi.end()) {
        return 0.0;  // constant phi; skips centring round-off
    }
    if (is_birth_death(chain)) return asymptotic_variance_birth_death(chain, phi);
    return asymptotic_variance_fundamental(chain, phi);
}

namespace {

// P^m(i, j) - pi_j = sum over the non-unit spectrum of l_k^m v_k(i) v_k(j) sqrt(pi_j / pi_i).
// Summing the decaying modes directly avoids the cancellation against pi
// that limits P^m - 1 pi^T to absolute accuracy 1e-16.
struct ModeExpansion {
    std::vector<double> lambda;
    MatrixXd left;   // v_k(i) / sqrt(pi_i)
    MatrixXd right;  // v_k(j) sqrt(pi_j)

    explicit ModeExpansion(const FiniteChain& chain) {
        const Index n = static_cast<Index>(chain.size());
        MatrixXd S(n, n);
        for (Index i = 0; i < n; ++i) {
            S(i, i) = chain.P(i, i);
            for (Index j = i + 1; j < n; ++j) S(i, j) = S(j, i) = std::sqrt(chain.P(i, j) * chain.P(j, i));
        }
        const auto eig = jacobi_eigen(S, 1e-15);
        lambda.assign(eig.values.begin() + 1, eig.values.end());
        const VectorXd root = chain.pi.cwiseSqrt();
        left = root.cwiseInverse().asDiagonal() * eig.vectors.rightCols(n - 1);
        right = root.asDiagonal() * eig.vectors.rightCols(n - 1);
    }

    double tv_from(Index start, std::size_t m) const {
        VectorXd coef(static_cast<Index>(lambda.size()));
        for (Index k = 0; k < coef.size(); ++k) {
            coef(k) = std::pow(lambda[static_cast<std::size_t>(k)], static_cast<double>(m)) * left(start, k);
        }
        return 0.5 * (right * coef).cwiseAbs().sum();
    }
};

}  // namespace

std::vector<double> tv_curve(const FiniteChain& chain, std::size_t start_index, std::size_t m_max) {
    if (start_index >= chain.size()) throw DomainError("start index out of range");
    if (m_max == 0) throw DomainError("m_max must be >= 1");
    if (chain.size() < 2) return std::vector<double>(m_max, 0.0);
    const ModeExpansion modes(chain);
    std::vector<double> out;
    out.reserve(m_max);
    for (std::size_t m = 1; m <= m_max; ++m) out.push_back(modes.tv_from(static_cast<Index>(start_index), m));
    return out;
}

std::vector<double> tv_curve_worst(const FiniteChain& chain, std::size_t m_max) {
    if (m_max == 0) throw DomainError("m_max must be >= 1");
    const Index n = static_cast<Index>(chain.size());
    if (n < 2) return std::vector<double>(m_max, 0.0);
    const ModeExpansion modes(chain);
    std::vector<double> out;
    out.reserve(m_max);
    for (std::size_t m = 1; m <= m_max; ++m) {
        double worst = 0.0;
        for (Index i = 0; i < n; ++i) worst = std::max(worst, modes.tv_from(i, m));
        out.push_back(worst);
    }
    return out;
}

TvBounds tv_bounds_mt(const SpectralSummary& summary, std::size_t m) {
    if (!(summary.pi_min > 0.0)) throw DomainError("TV bounds need pi_min > 0");
    const double decay = 0.5 * std::pow(summary.lambda_star(), static_cast<double>(m));
    return {decay, decay * std::sqrt((1.0 - summary.pi_min) / summary.pi_min)};
}

TvBounds tv_bounds_mt(const FiniteChain& chain, std::size_t m) { return tv_bounds_mt(spectral_summary(chain), m); }

Conductance conductance_exact(const FiniteChain& chain) {
    const std::size_t n = chain.size();
    if (n > kConductanceStateLimit) {
        throw TooManyStates("exhaustive conductance is limited to " + std::to_string(kConductanceStateLimit) +
                            " states");
    }
    if (n < 2) throw DomainError("conductance needs at least two states");

    struct Edge {
        std::size_t to;
        double flow;
    };
    std::vector<std::vector<Edge>> edges(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double p = chain.P(static_cast<Index>(i), static_cast<Index>(j));
            if (i != j && p > 0.0) edges[i].push_back({j, chain.pi(static_cast<Index>(i)) * p});
        }
    }

    Conductance best{std::numeric_limits<double>::infinity(), {}};
    std::uint32_t best_mask = 0;
    const std::uint32_t full = (1u << n) - 1u;
    for (std::uint32_t mask = 1; mask < full; ++mask) {
        double mass = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask >> i & 1u) mass += chain.pi(static_cast<Index>(i));
        }
        if (!(mass > 0.0) || mass > 0.5) continue;
        double out_flow = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(mask >> i & 1u)) continue;
            for (const auto& e : edges[i]) {
                if (!(mask >> e.to & 1u)) out_flow += e.flow;
            }
        }
        const double k = out_flow / mass;
        if (k < best.kappa) {
            best.kappa = k;
            best_mask = mask;
        }
    }
    if (best_mask == 0) throw DomainError("no subset with 0 < pi(A) <= 1/2");
    for (std::size_t i = 0; i < n; ++i) {
        if (best_mask >> i & 1u) best.argmin_set.push_back(i);
    }
    return best;
}

FiniteChain mixture_matrix(const std::vector<FiniteChain>& chains, const std::vector<double>& weights) {
    if (chains.empty() || chains.size() != weights.size()) throw DomainError("one weight per chain is required");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw WeightSumError("mixture weights must be nonnegative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw WeightSumError("mixture weights do not sum to 1");
    const FiniteChain& first = chains.front();
    MatrixXd P = MatrixXd::Zero(first.P.rows(), first.P.cols());
    for (std::size_t k = 0; k < chains.size(); ++k) {
        check_same_states(first.states, chains[k].states);
        if ((chains[k].pi - first.pi).cwiseAbs().maxCoeff() > kStationaryTol) {
            throw StateMismatch("mixture components have different stationary vectors");
        }
        P += weights[k] * chains[k].P;
    }
    return finite_chain_from_matrix(first.states, std::move(P), first.pi);
}

namespace {

std::string state_field(const ParamPoint& p) {
    if (p.is_integer()) return std::to_string(p.as_integer());
    std::string out;
    auto c = p.coords();
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (i) out.push_back(';');
        out += format_double(c[i]);
    }
    return out;
}

ParamPoint parse_state(const std::string& field) {
    if (field.find_first_of(".;eE") == std::string::npos) {
        try {
            std::size_t used = 0;
            const long long v = std::stoll(field, &used);
            if (used == field.size()) return ParamPoint::integer(v);
        } catch (const std::exception&) {
        }
    }
    std::vector<double> coords;
    std::istringstream in(field);
    std::string part;
    while (std::getline(in, part, ';')) {
        try {
            coords.push_back(std::stod(part));
        } catch (const std::exception&) {
            throw IoError("cannot parse state '" + field + "'");
        }
    }
    return ParamPoint::real(std::move(coords));
}

double parse_number(const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw IoError("trailing characters in number '" + s + "'");
        return v;
    } catch (const IoError&) {
        throw;
    } catch (const std::exception&) {
        throw IoError("cannot parse number '" + s + "'");
    }
}

}  // namespace

void write_chain_csv(const FiniteChain& chain, const std::string& path) {
    std::vector<std::string> header{"state", "pi"};
    for (std::size_t j = 0; j < chain.size(); ++j) header.push_back("p" + std::to_string(j));
    CsvWriter csv(header);
    for (std::size_t i = 0; i < chain.size(); ++i) {
        csv.cell(std::string_view(state_field(chain.states[i])));
        csv.cell(chain.pi(static_cast<Index>(i)));
        for (std::size_t j = 0; j < chain.size(); ++j) csv.cell(chain.P(static_cast<Index>(i), static_cast<Index>(j)));
        csv.end_row();
    }
    write_file_atomic(path, csv.str());
}

FiniteChain read_chain_csv(const std::string& path) {
    const auto rows = parse_csv(read_file(path));
    if (rows.size() < 2) throw IoError(path + ": expected a header and at least one state row");
    const std::size_t n = rows.size() - 1;
    if (rows[0].size() != n + 2 || rows[0][0] != "state" || rows[0][1] != "pi") {
        throw IoError(path + ": header must be state,pi,p0,...");
    }
    std::vector<ParamPoint> states;
    MatrixXd P(static_cast<Index>(n), static_cast<Index>(n));
    VectorXd pi(static_cast<Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = rows[i + 1];
        if (r.size() != n + 2) throw IoError(path + ": row " + std::to_string(i + 1) + " has the wrong width");
        states.push_back(parse_state(r[0]));
        pi(static_cast<Index>(i)) = parse_number(r[1]);
        for (std::size_t j = 0; j < n; ++j) P(static_cast<Index>(i), static_cast<Index>(j)) = parse_number(r[j + 2]);
    }
    return finite_chain_from_matrix(std::move(states), std::move(P), pi);
}

}  // namespace abcmc
