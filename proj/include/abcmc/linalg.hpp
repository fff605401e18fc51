#pragma once

#include <Eigen/Dense>
#include <vector>

namespace abcmc {

struct SymmetricEigen {
    /// Eigenvalues in descending order.
    std::vector<double> values;
    /// Column k is the unit eigenvector for values[k].
    Eigen::MatrixXd vectors;
    int sweeps = 0;
};

/// Cyclic Jacobi rotations for a dense symmetric matrix. Iterates until the
/// off-diagonal Frobenius norm is at most tol times the Frobenius norm of
/// the input; throws EigenFailure if that does not happen within max_sweeps.
SymmetricEigen jacobi_eigen(Eigen::MatrixXd a, double tol = 1e-12, int max_sweeps = 100);

}  // namespace abcmc
