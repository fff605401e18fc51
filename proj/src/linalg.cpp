#include "abcmc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "abcmc/errors.hpp"

namespace abcmc {

namespace {

double off_diagonal_norm(const Eigen::MatrixXd& a) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            if (i != j) s += a(i, j) * a(i, j);
        }
    }
    return std::sqrt(s);
}

}  // namespace

SymmetricEigen jacobi_eigen(Eigen::MatrixXd a, double tol, int max_sweeps) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n) throw EigenFailure("jacobi_eigen needs a square matrix");
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff())) {
        throw EigenFailure("jacobi_eigen needs a symmetric matrix");
    }
    a = 0.5 * (a + a.transpose());

    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    const double scale = a.norm();
    const double target = tol * (scale > 0.0 ? scale : 1.0);

    int sweep = 0;
    while (off_diagonal_norm(a) > target) {
        if (sweep == max_sweeps) throw EigenFailure("Jacobi iteration did not converge");
        ++sweep;
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                // rotation angle from the standard stable formulation
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) > a(j, j); });

    SymmetricEigen out;
    out.sweeps = sweep;
    out.vectors.resize(n, n);
    out.values.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values.push_back(a(order[k], order[k]));
        out.vectors.col(k) = v.col(order[k]);
    }
    return out;
}

}  // namespace abcmc
