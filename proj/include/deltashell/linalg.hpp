#pragma once
#include <Eigen/Dense>
#include <vector>

namespace ds {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Thin LAPACK wrappers (dense, column-major).  These carry the heavy
// factorizations; everything else stays in Eigen.

// Singular values, descending.  Throws numerical_error on LAPACK failure.
Vector singular_values(const Matrix& a);
double largest_singular_value(const Matrix& a);
double smallest_singular_value(const Matrix& a);

// Dense product through the BLAS dgemm (markedly faster than Eigen's
// unvectorized baseline for the large volume-grid products).
Matrix matmul(const Matrix& a, const Matrix& b);

// Eigen-decomposition of a symmetric matrix; values ascending.
void sym_eigen(const Matrix& a, Vector& values);
void sym_eigen(const Matrix& a, Vector& values, Matrix& vectors);
double sym_eigen_max(const Matrix& a);

// In-place LU with partial pivoting.
struct LuFactor {
    Matrix lu;
    std::vector<int> ipiv;
    void factor(const Matrix& a);           // throws numerical_error if singular
    Matrix solve(const Matrix& rhs) const;  // A X = rhs
};

// Power iteration on A^T A for the largest singular value (fallback for
// matrices too large for dense SVD); relative tolerance on the value.
double power_iteration_norm(const Matrix& a, double tol = 1e-8, int max_iter = 5000);

} // namespace ds
