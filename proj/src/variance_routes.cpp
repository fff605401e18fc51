// Fundamental-matrix and spectral variance routes. Both run in double
// precision when the chain is well conditioned and move to wider binary
// floats otherwise (chains whose spectral gap sits far below 1e-16 are
// common here: the two-sided pseudo-marginal chains reach 1e-50).

#include <algorithm>
#include <cmath>
#include <numeric>
#include <type_traits>
#include <variant>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "abcmc/errors.hpp"
#include "abcmc/finite_chain.hpp"
#include "abcmc/linalg.hpp"

namespace abcmc {

namespace {

namespace mp = boost::multiprecision;
using F40 = mp::number<mp::cpp_bin_float<40>, mp::et_off>;
using F80 = mp::number<mp::cpp_bin_float<80>, mp::et_off>;
using F160 = mp::number<mp::cpp_bin_float<160>, mp::et_off>;
using F320 = mp::number<mp::cpp_bin_float<320>, mp::et_off>;

using Eigen::Index;

// Double-precision attempts are abandoned below these levels.
constexpr double kDoubleRcondFloor = 1e-6;
constexpr double kDoubleGapFloor = 1e-5;

void require_irreducible(const Eigen::MatrixXd& P) {
    const Index n = P.rows();
    auto reach = [&](bool transpose) {
        std::vector<char> seen(static_cast<std::size_t>(n), 0);
        std::vector<Index> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            const Index i = stack.back();
            stack.pop_back();
            for (Index j = 0; j < n; ++j) {
                const double p = transpose ? P(j, i) : P(i, j);
                if (p > 0.0 && !seen[static_cast<std::size_t>(j)]) {
                    seen[static_cast<std::size_t>(j)] = 1;
                    stack.push_back(j);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
    };
    if (!reach(false) || !reach(true)) throw SingularFundamentalMatrix("chain is reducible");
}

void check_phi(const FiniteChain& chain, std::span<const double> phi) {
    if (phi.size() != chain.size()) throw DomainError("test function length differs from the state count");
}

template <class T>
T escape(const Eigen::MatrixXd& P, Index i) {
    T s = 0;
    for (Index j = 0; j < P.cols(); ++j) {
        if (j != i) s += T(P(i, j));
    }
    return s;
}

template <class T>
std::vector<T> centred(const Eigen::VectorXd& pi, std::span<const double> phi) {
    T mean = 0;
    for (std::size_t i = 0; i < phi.size(); ++i) mean += T(pi(static_cast<Index>(i))) * T(phi[i]);
    std::vector<T> f(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) f[i] = T(phi[i]) - mean;
    return f;
}

template <class T>
T pow10(int e) {
    return pow(T(10), e);
}

// LU with partial pivoting of I - P + 1 pi^T, diagonal from the escape sums.
template <class T>
struct WideLU {
    Index n = 0;
    std::vector<T> lu;
    std::vector<Index> perm;
    T min_pivot, max_entry;

    WideLU(const Eigen::MatrixXd& P, const Eigen::VectorXd& pi) : n(P.rows()), lu(static_cast<std::size_t>(n * n)) {
        auto at = [&](Index i, Index j) -> T& { return lu[static_cast<std::size_t>(i * n + j)]; };
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < n; ++j) at(i, j) = (i == j ? escape<T>(P, i) : T(-P(i, j))) + T(pi(j));
        }
        max_entry = 0;
        for (const auto& v : lu) max_entry = std::max(max_entry, T(abs(v)));
        perm.resize(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), Index{0});
        min_pivot = max_entry;
        for (Index k = 0; k < n; ++k) {
            Index best = k;
            for (Index i = k + 1; i < n; ++i) {
                if (abs(at(i, k)) > abs(at(best, k))) best = i;
            }
            if (best != k) {
                for (Index j = 0; j < n; ++j) std::swap(at(k, j), at(best, j));
                std::swap(perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(best)]);
            }
            const T piv = at(k, k);
            min_pivot = std::min(min_pivot, T(abs(piv)));
            if (piv == 0) continue;
            for (Index i = k + 1; i < n; ++i) {
                const T m = at(i, k) / piv;
                at(i, k) = m;
                if (m == 0) continue;
                for (Index j = k + 1; j < n; ++j) at(i, j) -= m * at(k, j);
            }
        }
    }

    double variance(const Eigen::VectorXd& pi, std::span<const double> phi) const {
        auto at = [&](Index i, Index j) -> const T& { return lu[static_cast<std::size_t>(i * n + j)]; };
        const auto f = centred<T>(pi, phi);
        std::vector<T> z(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = f[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < i; ++j) z[static_cast<std::size_t>(i)] -= at(i, j) * z[static_cast<std::size_t>(j)];
        }
        for (Index i = n - 1; i >= 0; --i) {
            for (Index j = i + 1; j < n; ++j) z[static_cast<std::size_t>(i)] -= at(i, j) * z[static_cast<std::size_t>(j)];
            z[static_cast<std::size_t>(i)] /= at(i, i);
        }
        T v = 0;
        for (Index i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            v += T(pi(i)) * f[k] * (2 * z[k] - f[k]);
        }
        return static_cast<double>(v);
    }

    bool resolved() const { return min_pivot > max_entry * T(n) * pow10<T>(30 - std::numeric_limits<T>::digits10); }
};

// Cyclic Jacobi on the symmetrised Laplacian I - D^{1/2} P D^{-1/2}.
template <class T>
struct WideSpectrum {
    Index n = 0;
    std::vector<T> mu;          // ascending
    std::vector<T> vectors;     // column k (row-major n x n) belongs to mu[k]
    T norm;

    WideSpectrum(const Eigen::MatrixXd& P) : n(P.rows()) {
        std::vector<T> a(static_cast<std::size_t>(n * n));
        std::vector<T> v(static_cast<std::size_t>(n * n), T(0));
        auto A = [&](Index i, Index j) -> T& { return a[static_cast<std::size_t>(i * n + j)]; };
        auto V = [&](Index i, Index j) -> T& { return v[static_cast<std::size_t>(i * n + j)]; };
        for (Index i = 0; i < n; ++i) {
            V(i, i) = 1;
            A(i, i) = escape<T>(P, i);
            for (Index j = i + 1; j < n; ++j) {
                const T s = -sqrt(T(P(i, j)) * T(P(j, i)));
                A(i, j) = s;
                A(j, i) = s;
            }
        }
        norm = 0;
        for (const auto& x : a) norm += x * x;
        norm = sqrt(norm);
        const T target = norm * pow10<T>(4 - std::numeric_limits<T>::digits10);
        auto off = [&] {
            T s = 0;
            for (Index i = 0; i < n; ++i) {
                for (Index j = 0; j < n; ++j) {
                    if (i != j) s += A(i, j) * A(i, j);
                }
            }
            return sqrt(s);
        };
        int sweeps = 0;
        while (off() > target) {
            if (++sweeps > 100) throw EigenFailure("extended-precision Jacobi did not converge");
            for (Index p = 0; p + 1 < n; ++p) {
                for (Index q = p + 1; q < n; ++q) {
                    const T apq = A(p, q);
                    if (apq == 0) continue;
                    const T theta = (A(q, q) - A(p, p)) / (2 * apq);
                    const T sign = theta < 0 ? T(-1) : T(1);
                    const T t = sign / (abs(theta) + sqrt(theta * theta + 1));
                    const T c = 1 / sqrt(t * t + 1);
                    const T s = t * c;
                    for (Index k = 0; k < n; ++k) {
                        const T akp = A(k, p), akq = A(k, q);
                        A(k, p) = c * akp - s * akq;
                        A(k, q) = s * akp + c * akq;
                    }
                    for (Index k = 0; k < n; ++k) {
                        const T apk = A(p, k), aqk = A(q, k);
                        A(p, k) = c * apk - s * aqk;
                        A(q, k) = s * apk + c * aqk;
                    }
                    A(p, q) = 0;
                    A(q, p) = 0;
                    for (Index k = 0; k < n; ++k) {
                        const T vkp = V(k, p), vkq = V(k, q);
                        V(k, p) = c * vkp - s * vkq;
                        V(k, q) = s * vkp + c * vkq;
                    }
                }
            }
        }
        std::vector<Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Index{0});
        std::sort(order.begin(), order.end(), [&](Index i, Index j) { return A(i, i) < A(j, j); });
        mu.resize(static_cast<std::size_t>(n));
        vectors.resize(static_cast<std::size_t>(n * n));
        for (Index k = 0; k < n; ++k) {
            mu[static_cast<std::size_t>(k)] = A(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
            for (Index i = 0; i < n; ++i) {
                vectors[static_cast<std::size_t>(i * n + k)] = V(i, order[static_cast<std::size_t>(k)]);
            }
        }
    }

    // The null eigenvalue is resolved to absolute accuracy ~ n eps |A|;
    // mu[1] must clear that by a wide margin.
    bool resolved() const { return mu[1] > norm * T(n) * pow10<T>(30 - std::numeric_limits<T>::digits10); }

    double variance(const Eigen::VectorXd& pi, std::span<const double> phi) const {
        const auto f = centred<T>(pi, phi);
        std::vector<T> w(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = sqrt(T(pi(i))) * f[static_cast<std::size_t>(i)];
        T v = 0;
        for (Index k = 1; k < n; ++k) {
            T c = 0;
            for (Index i = 0; i < n; ++i) c += vectors[static_cast<std::size_t>(i * n + k)] * w[static_cast<std::size_t>(i)];
            const T m = mu[static_cast<std::size_t>(k)];
            v += (2 - m) / m * c * c;
        }
        return static_cast<double>(v);
    }
};

std::vector<double> probe_function(std::size_t n) {
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<double>(i) + 1.0 / (2.0 + static_cast<double>(i));
    return p;
}

}  // namespace

struct FundamentalVariance::Impl {
    Eigen::VectorXd pi;
    std::variant<Eigen::FullPivLU<Eigen::MatrixXd>, WideLU<F40>, WideLU<F80>, WideLU<F160>, WideLU<F320>> lu;
    int digits = 16;
};

FundamentalVariance::FundamentalVariance(const FiniteChain& chain) : impl_(std::make_unique<Impl>()) {
    const Index n = static_cast<Index>(chain.size());
    if (n == 0) throw DomainError("chain has no states");
    require_irreducible(chain.P);
    impl_->pi = chain.pi;

    Eigen::MatrixXd M = -chain.P;
    for (Index i = 0; i < n; ++i) {
        double s = 0.0;
        for (Index j = 0; j < n; ++j) {
            if (j != i) s += chain.P(i, j);
        }
        M(i, i) = s;
    }
    M += Eigen::VectorXd::Ones(n) * chain.pi.transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> dlu(M);
    if (dlu.isInvertible() && dlu.rcond() > kDoubleRcondFloor) {
        impl_->lu = std::move(dlu);
        return;
    }

    // Accept a width once its pivots are resolved and the next width agrees on a probe.
    const auto probe = probe_function(chain.size());
    auto settle = [&](auto&& lower, auto&& upper, int digits) {
        if (!lower.resolved()) return false;
        const double a = lower.variance(chain.pi, probe), b = upper.variance(chain.pi, probe);
        if (!(std::abs(a - b) <= 1e-15 * std::abs(b))) return false;
        impl_->lu = std::move(upper);
        impl_->digits = digits;
        return true;
    };
    WideLU<F40> l40(chain.P, chain.pi);
    WideLU<F80> l80(chain.P, chain.pi);
    if (settle(l40, l80, 80)) return;
    WideLU<F160> l160(chain.P, chain.pi);
    if (settle(l80, l160, 160)) return;
    WideLU<F320> l320(chain.P, chain.pi);
    if (settle(l160, l320, 320)) return;
    throw SingularFundamentalMatrix("fundamental matrix is singular to 160 digits");
}

FundamentalVariance::~FundamentalVariance() = default;
FundamentalVariance::FundamentalVariance(FundamentalVariance&&) noexcept = default;

double FundamentalVariance::operator()(std::span<const double> phi) const {
    if (phi.size() != static_cast<std::size_t>(impl_->pi.size())) {
        throw DomainError("test function length differs from the state count");
    }
    return std::visit(
        [&](const auto& lu) -> double {
            using L = std::decay_t<decltype(lu)>;
            if constexpr (std::is_same_v<L, Eigen::FullPivLU<Eigen::MatrixXd>>) {
                const Eigen::VectorXd f0 = Eigen::Map<const Eigen::VectorXd>(phi.data(), impl_->pi.size());
                const Eigen::VectorXd f = (f0.array() - impl_->pi.dot(f0)).matrix();
                const Eigen::VectorXd z = lu.solve(f);
                double v = 0.0;
                for (Index i = 0; i < f.size(); ++i) v += impl_->pi(i) * f(i) * (2.0 * z(i) - f(i));
                return v;
            } else {
                return lu.variance(impl_->pi, phi);
            }
        },
        impl_->lu);
}

int FundamentalVariance::digits() const { return impl_->digits; }

struct SpectralVariance::Impl {
    Eigen::VectorXd pi;
    // double: Laplacian spectrum ascending with its eigenvectors
    std::vector<double> mu;
    Eigen::MatrixXd vectors;
    std::variant<std::monostate, WideSpectrum<F40>, WideSpectrum<F80>, WideSpectrum<F160>, WideSpectrum<F320>> wide;
    int digits = 16;
};

SpectralVariance::SpectralVariance(const FiniteChain& chain) : impl_(std::make_unique<Impl>()) {
    const Index n = static_cast<Index>(chain.size());
    if (n < 2) throw DomainError("spectral form needs at least two states");
    require_irreducible(chain.P);
    impl_->pi = chain.pi;

    Eigen::MatrixXd A(n, n);
    for (Index i = 0; i < n; ++i) {
        double s = 0.0;
        for (Index j = 0; j < n; ++j) {
            if (j != i) s += chain.P(i, j);
        }
        A(i, i) = s;
        for (Index j = i + 1; j < n; ++j) {
            const double v = -std::sqrt(chain.P(i, j) * chain.P(j, i));
            A(i, j) = v;
            A(j, i) = v;
        }
    }
    const auto eig = jacobi_eigen(A, 1e-15);
    impl_->mu.assign(eig.values.rbegin(), eig.values.rend());
    impl_->vectors = eig.vectors.rowwise().reverse();
    if (impl_->mu[1] > kDoubleGapFloor * A.norm()) return;

    auto attempt = [&]<class W>(std::type_identity<W>, int digits) {
        W w(chain.P);
        if (!w.resolved()) return false;
        impl_->wide = std::move(w);
        impl_->digits = digits;
        return true;
    };
    if (attempt(std::type_identity<WideSpectrum<F40>>{}, 40)) return;
    if (attempt(std::type_identity<WideSpectrum<F80>>{}, 80)) return;
    if (attempt(std::type_identity<WideSpectrum<F160>>{}, 160)) return;
    if (attempt(std::type_identity<WideSpectrum<F320>>{}, 320)) return;
    throw SingularFundamentalMatrix("spectral gap is unresolved at 320 digits");
}

SpectralVariance::~SpectralVariance() = default;
SpectralVariance::SpectralVariance(SpectralVariance&&) noexcept = default;

double SpectralVariance::operator()(std::span<const double> phi) const {
    if (phi.size() != static_cast<std::size_t>(impl_->pi.size())) {
        throw DomainError("test function length differs from the state count");
    }
    if (impl_->wide.index() != 0) {
        return std::visit(
            [&](const auto& w) -> double {
                if constexpr (std::is_same_v<std::decay_t<decltype(w)>, std::monostate>) {
                    return 0.0;
                } else {
                    return w.variance(impl_->pi, phi);
                }
            },
            impl_->wide);
    }
    const Index n = impl_->pi.size();
    const Eigen::VectorXd f0 = Eigen::Map<const Eigen::VectorXd>(phi.data(), n);
    const Eigen::VectorXd w = impl_->pi.cwiseSqrt().cwiseProduct((f0.array() - impl_->pi.dot(f0)).matrix());
    double v = 0.0;
    for (Index k = 1; k < n; ++k) {
        const double c = impl_->vectors.col(k).dot(w);
        const double m = impl_->mu[static_cast<std::size_t>(k)];
        v += (2.0 - m) / m * c * c;
    }
    return v;
}

int SpectralVariance::digits() const { return impl_->digits; }

double asymptotic_variance_fundamental(const FiniteChain& chain, std::span<const double> phi) {
    check_phi(chain, phi);
    return FundamentalVariance(chain)(phi);
}

double asymptotic_variance_spectral(const FiniteChain& chain, std::span<const double> phi) {
    check_phi(chain, phi);
    return SpectralVariance(chain)(phi);
}

}  // namespace abcmc
