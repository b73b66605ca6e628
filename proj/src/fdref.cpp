#include <cmath>

#include "deltashell/fdref.hpp"
#include "deltashell/parallel.hpp"

namespace ds {

double FdSolution::interp(const Vec& x) const
{
    // bilinear on the interior lattice; the Dirichlet frame is value zero
    const double gx = (x(0) - lo(0)) / hx - 1.0;
    const double gy = (x(1) - lo(1)) / hy - 1.0;
    const int ix = static_cast<int>(std::floor(gx));
    const int iy = static_cast<int>(std::floor(gy));
    if (ix < -1 || iy < -1 || ix > nx - 1 || iy > ny - 1) return 0.0;
    const double tx = gx - ix, ty = gy - iy;
    auto at = [&](int i, int j) {
        if (i < 0 || j < 0 || i >= nx || j >= ny) return 0.0;
        return u(static_cast<std::ptrdiff_t>(j) * nx + i);
    };
    return (1.0 - tx) * (1.0 - ty) * at(ix, iy) + tx * (1.0 - ty) * at(ix + 1, iy) +
           (1.0 - tx) * ty * at(ix, iy + 1) + tx * ty * at(ix + 1, iy + 1);
}

FdSolution fd_resolvent_2d(const TransversePotential& V, const SurfaceQuadrature& q,
                           double eps, double lambda,
                           const std::function<double(const Vec&)>& f, const Vec& lo,
                           const Vec& hi, double h, double tol)
{
    if (q.surface->d != 2)
        throw config_error("fd_resolvent_2d: 5-point stencil is planar only");
    if (h <= 0.0) throw config_error("fd_resolvent_2d: need h > 0");

    FdSolution s;
    s.lo = lo;
    s.hi = hi;
    s.nx = std::max(2, static_cast<int>(std::ceil((hi(0) - lo(0)) / h)) - 1);
    s.ny = std::max(2, static_cast<int>(std::ceil((hi(1) - lo(1)) / h)) - 1);
    s.hx = (hi(0) - lo(0)) / (s.nx + 1);
    s.hy = (hi(1) - lo(1)) / (s.ny + 1);
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(s.nx) * s.ny;

    // diagonal term (-V - lambda) and right-hand side on the lattice
    Vec diag(n), b(n);
    double vmax = 0.0;
    for_each_row(s.ny, [&](std::ptrdiff_t j) {
        Vec x(2);
        for (int i = 0; i < s.nx; ++i) {
            x << lo(0) + (i + 1) * s.hx, lo(1) + (j + 1) * s.hy;
            const double v = scaled_potential_value(V, q, eps, x);
            diag(j * s.nx + i) = -v - lambda;
            b(j * s.nx + i) = f(x);
        }
    });
    for (std::ptrdiff_t k = 0; k < n; ++k) vmax = std::max(vmax, -lambda - diag(k));
    if (vmax >= -lambda)
        throw numerical_error("fd_resolvent_2d: potential reaches the shift, CG not definite");

    const double cx = 1.0 / (s.hx * s.hx), cy = 1.0 / (s.hy * s.hy);
    auto apply = [&](const Vec& in, Vec& out) {
        for_each_row(s.ny, [&](std::ptrdiff_t j) {
            for (int i = 0; i < s.nx; ++i) {
                const std::ptrdiff_t k = j * s.nx + i;
                double v = (2.0 * (cx + cy) + diag(k)) * in(k);
                if (i > 0) v -= cx * in(k - 1);
                if (i < s.nx - 1) v -= cx * in(k + 1);
                if (j > 0) v -= cy * in(k - s.nx);
                if (j < s.ny - 1) v -= cy * in(k + s.nx);
                out(k) = v;
            }
        });
    };

    Vec u = Vec::Zero(n), r = b, p = b, ap(n);
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        s.u = std::move(u);
        return s;
    }
    double rr = r.squaredNorm();
    const int maxit = 50000;
    int it = 0;
    for (; it < maxit; ++it) {
        if (std::sqrt(rr) <= tol * bnorm) break;
        apply(p, ap);
        const double alpha = rr / p.dot(ap);
        u += alpha * p;
        r -= alpha * ap;
        const double rr2 = r.squaredNorm();
        p = r + (rr2 / rr) * p;
        rr = rr2;
    }
    if (std::sqrt(rr) > tol * bnorm)
        throw numerical_error("fd_resolvent_2d: CG stalled before the tolerance");
    s.u = std::move(u);
    s.iterations = it;
    s.residual = std::sqrt(rr) / bnorm;
    return s;
}

} // namespace ds
