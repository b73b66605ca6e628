#include "deltashell/linalg.hpp"

#include <cblas.h>
#include <lapacke.h>

#include <algorithm>
#include <cmath>

#include "deltashell/errors.hpp"

namespace ds {

Vector singular_values(const Matrix& a)
{
    const lapack_int m = static_cast<lapack_int>(a.rows());
    const lapack_int n = static_cast<lapack_int>(a.cols());
    Matrix work = a; // dgesdd destroys its input
    Vector s(std::min(a.rows(), a.cols()));
    const lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', m, n, work.data(), m,
                                           s.data(), nullptr, 1, nullptr, 1);
    if (info != 0)
        throw numerical_error("dgesdd failed with info=" + std::to_string(info));
    return s;
}

double largest_singular_value(const Matrix& a)
{
    const Vector s = singular_values(a);
    return s.size() ? s(0) : 0.0;
}

double smallest_singular_value(const Matrix& a)
{
    const Vector s = singular_values(a);
    return s.size() ? s(s.size() - 1) : 0.0;
}

Matrix matmul(const Matrix& a, const Matrix& b)
{
    if (a.cols() != b.rows()) throw numerical_error("matmul: shape mismatch");
    Matrix c(a.rows(), b.cols());
    if (c.size() == 0) return c;
    cblas_dgemm(CblasColMajor, CblasNoTrans, CblasNoTrans,
                static_cast<blasint>(a.rows()), static_cast<blasint>(b.cols()),
                static_cast<blasint>(a.cols()), 1.0, a.data(),
                static_cast<blasint>(a.rows()), b.data(),
                static_cast<blasint>(b.rows()), 0.0, c.data(),
                static_cast<blasint>(c.rows()));
    return c;
}

void sym_eigen(const Matrix& a, Vector& values)
{
    Matrix work = a;
    const lapack_int n = static_cast<lapack_int>(a.rows());
    values.resize(n);
    const lapack_int info =
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, work.data(), n, values.data());
    if (info != 0)
        throw numerical_error("dsyevd failed with info=" + std::to_string(info));
}

void sym_eigen(const Matrix& a, Vector& values, Matrix& vectors)
{
    vectors = a;
    const lapack_int n = static_cast<lapack_int>(a.rows());
    values.resize(n);
    const lapack_int info =
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, vectors.data(), n, values.data());
    if (info != 0)
        throw numerical_error("dsyevd failed with info=" + std::to_string(info));
}

double sym_eigen_max(const Matrix& a)
{
    Vector v;
    sym_eigen(a, v);
    return v(v.size() - 1);
}

void LuFactor::factor(const Matrix& a)
{
    lu = a;
    const lapack_int n = static_cast<lapack_int>(a.rows());
    ipiv.assign(n, 0);
    std::vector<lapack_int> piv(n);
    const lapack_int info =
        LAPACKE_dgetrf(LAPACK_COL_MAJOR, n, n, lu.data(), n, piv.data());
    if (info != 0)
        throw numerical_error("dgetrf: matrix singular to working precision (info=" +
                              std::to_string(info) + ")");
    for (lapack_int i = 0; i < n; ++i) ipiv[i] = static_cast<int>(piv[i]);
}

Matrix LuFactor::solve(const Matrix& rhs) const
{
    Matrix x = rhs;
    const lapack_int n = static_cast<lapack_int>(lu.rows());
    const lapack_int nrhs = static_cast<lapack_int>(rhs.cols());
    std::vector<lapack_int> piv(ipiv.begin(), ipiv.end());
    const lapack_int info = LAPACKE_dgetrs(LAPACK_COL_MAJOR, 'N', n, nrhs, lu.data(), n,
                                           piv.data(), x.data(), n);
    if (info != 0)
        throw numerical_error("dgetrs failed with info=" + std::to_string(info));
    return x;
}

double power_iteration_norm(const Matrix& a, double tol, int max_iter)
{
    if (a.size() == 0) return 0.0;
    Vector v = Vector::Ones(a.cols());
    v.normalize();
    double prev = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Vector w = a.transpose() * (a * v);
        const double nw = w.norm();
        if (nw == 0.0) return 0.0;
        v = w / nw;
        const double est = std::sqrt(nw);
        if (it > 2 && std::fabs(est - prev) <= tol * est) return est;
        prev = est;
    }
    return prev;
}

} // namespace ds
