#pragma once
#include <functional>

#include "deltashell/geometry.hpp"
#include "deltashell/potential.hpp"

namespace ds {

// 5-point finite-difference solution of (-Delta - V_eps - lambda) u = f on a
// rectangle with zero Dirichlet data, solved matrix-free by conjugate
// gradients; lambda below -sup V_eps keeps the system positive definite
struct FdSolution {
    Vec lo, hi;
    double hx = 0.0, hy = 0.0;
    int nx = 0, ny = 0; // interior points per direction
    Vec u;              // row-major interior values
    int iterations = 0;
    double residual = 0.0; // final relative CG residual

    double interp(const Vec& x) const; // bilinear, zero outside the rectangle
};

FdSolution fd_resolvent_2d(const TransversePotential& V, const SurfaceQuadrature& q,
                           double eps, double lambda,
                           const std::function<double(const Vec&)>& f, const Vec& lo,
                           const Vec& hi, double h, double tol = 1e-8);

} // namespace ds
