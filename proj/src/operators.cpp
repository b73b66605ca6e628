#include "deltashell/operators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "deltashell/bessel.hpp"
#include "deltashell/linalg.hpp"
#include "deltashell/parallel.hpp"
#include "deltashell/quadrules.hpp"
#include "deltashell/singular.hpp"

namespace ds {

namespace {

// cells within this many local cell scales of an evaluation point get
// re-integrated instead of the plain Nystrom entry
constexpr double NEAR_RADIUS = 2.5;

double curvature_d2(const Chart& c, const Vec& u, int orientation)
{
    const Mat dm = chart_dphi(c, u);
    const Vec nu = chart_normal(c, u, orientation);
    return nu.dot(chart_d2phi(c, u)[0]) / dm.col(0).squaredNorm();
}

// physical extent of the parameter cell owned by each node
std::vector<double> node_scales(const SurfaceQuadrature& q)
{
    std::vector<double> len(q.size());
    for (int j = 0; j < q.size(); ++j) {
        const auto& n = q.nodes[j];
        const Chart& c = q.surface->charts[n.chart];
        const Mat dm = chart_dphi(c, n.u);
        if (q.surface->d == 2) {
            len[j] = dm.col(0).norm() * (n.cell_hi(0) - n.cell_lo(0));
        } else {
            len[j] = std::max(dm.col(0).norm() * (n.cell_hi(0) - n.cell_lo(0)),
                              dm.col(1).norm() * (n.cell_hi(1) - n.cell_lo(1)));
        }
    }
    return len;
}

// parameter in node j's cell nearest to p on the delta-shifted curve, found
// by coarse scan + window shrinking; returns {tau, distance}
std::pair<double, double> nearest_param_d2(const SurfaceQuadrature& q, int j,
                                           double delta, const Vec& p,
                                           const double* hint)
{
    const auto& n = q.nodes[j];
    const Chart& c = q.surface->charts[n.chart];
    const int orient = q.surface->orientation;
    const double a = n.cell_lo(0), b = n.cell_hi(0);
    auto ypoint = [&](double tau) {
        Vec u(1);
        u << tau;
        return Vec(c.phi(u) + delta * chart_normal(c, u, orient));
    };
    double best = a, bd = std::numeric_limits<double>::infinity();
    if (hint) {
        best = std::clamp(*hint, a, b);
        bd = (p - ypoint(best)).squaredNorm();
    }
    double lo = a, hi = b;
    const int rounds = hint ? 2 : 3;
    for (int round = 0; round < rounds; ++round) {
        const int m = (round == 0 && !hint) ? 9 : 5;
        for (int k = 0; k < m; ++k) {
            const double t = lo + (k + 0.5) * (hi - lo) / m;
            const double d = (p - ypoint(t)).squaredNorm();
            if (d < bd) {
                bd = d;
                best = t;
            }
        }
        const double w = 0.25 * (hi - lo);
        lo = std::max(a, best - w);
        hi = std::min(b, best + w);
    }
    return {best, std::sqrt(bd)};
}

int graded_levels(double width, double gap)
{
    gap = std::max(gap, 1e-14);
    return std::clamp(static_cast<int>(std::ceil(std::log2(width / gap))) + 3, 3, 40);
}

// integral over node j's parameter cell of G(|p - Y_delta(u)|) against the
// delta-shifted surface measure (partition-of-unity weight included)
double cell_int_d2(const SpectralParameter& sp, const SurfaceQuadrature& q, int j,
                   double delta, const Vec& p, const double* hint = nullptr)
{
    const auto& n = q.nodes[j];
    const Chart& c = q.surface->charts[n.chart];
    const int orient = q.surface->orientation;
    const double a = n.cell_lo(0), b = n.cell_hi(0);

    const auto [best, gap] = nearest_param_d2(q, j, delta, p, hint);
    const int levels = graded_levels(b - a, gap);

    auto f = [&](double tau) {
        Vec u(1);
        u << tau;
        const Mat dm = chart_dphi(c, u);
        const double speed = dm.col(0).norm();
        const Vec nu = chart_normal(c, u, orient);
        const double L = nu.dot(chart_d2phi(c, u)[0]) / (speed * speed);
        const Vec y = c.phi(u) + delta * nu;
        const double meas = speed * (1.0 - delta * L);
        return green_radial(2, sp, (p - y).norm()) * meas;
    };
    return graded_integrate(f, a, b, best, 8, levels);
}

double cell_int_d3(const SpectralParameter& sp, const SurfaceQuadrature& q, int j,
                   double delta, const Vec& p, const Vec* hint = nullptr)
{
    const auto& n = q.nodes[j];
    const Chart& c = q.surface->charts[n.chart];
    const int orient = q.surface->orientation;
    const double ax = n.cell_lo(0), bx = n.cell_hi(0);
    const double ay = n.cell_lo(1), by = n.cell_hi(1);

    auto ypoint = [&](double ux, double uy) {
        Vec u(2);
        u << ux, uy;
        return Vec(c.phi(u) + delta * chart_normal(c, u, orient));
    };
    double bestx = ax, besty = ay, bd = std::numeric_limits<double>::infinity();
    if (hint) {
        bestx = std::clamp((*hint)(0), ax, bx);
        besty = std::clamp((*hint)(1), ay, by);
        bd = (p - ypoint(bestx, besty)).squaredNorm();
    }
    double lox = ax, hix = bx, loy = ay, hiy = by;
    const int rounds = hint ? 3 : 4;
    for (int round = 0; round < rounds; ++round) {
        const int m = (round == 0 && !hint) ? 7 : 5;
        for (int kx = 0; kx < m; ++kx)
            for (int ky = 0; ky < m; ++ky) {
                const double ux = lox + (kx + 0.5) * (hix - lox) / m;
                const double uy = loy + (ky + 0.5) * (hiy - loy) / m;
                const double d = (p - ypoint(ux, uy)).squaredNorm();
                if (d < bd) {
                    bd = d;
                    bestx = ux;
                    besty = uy;
                }
            }
        const double wx = 0.25 * (hix - lox), wy = 0.25 * (hiy - loy);
        lox = std::max(ax, bestx - wx);
        hix = std::min(bx, bestx + wx);
        loy = std::max(ay, besty - wy);
        hiy = std::min(by, besty + wy);
    }
    // Gauss-Newton polish: when the singular point lies inside this cell the
    // Duffy center has to hit its preimage to far better than the grid-search
    // resolution, or the graded rule integrates the wrong peak
    {
        const double hstep = 1e-6 * std::max(bx - ax, by - ay);
        for (int it = 0; it < 30; ++it) {
            // one-sided at the cell boundary so samples stay in the chart
            const double xm = std::max(ax, bestx - hstep), xp = std::min(bx, bestx + hstep);
            const double ym = std::max(ay, besty - hstep), yp = std::min(by, besty + hstep);
            Mat jac(3, 2);
            jac.col(0) = (ypoint(xp, besty) - ypoint(xm, besty)) / (xp - xm);
            jac.col(1) = (ypoint(bestx, yp) - ypoint(bestx, ym)) / (yp - ym);
            const Vec res = p - ypoint(bestx, besty);
            const Mat jtj = jac.transpose() * jac;
            const Vec rhs = jac.transpose() * res;
            const double det = jtj(0, 0) * jtj(1, 1) - jtj(0, 1) * jtj(1, 0);
            if (std::fabs(det) < 1e-300) break;
            const double du = (jtj(1, 1) * rhs(0) - jtj(0, 1) * rhs(1)) / det;
            const double dv = (jtj(0, 0) * rhs(1) - jtj(1, 0) * rhs(0)) / det;
            const double nx = std::clamp(bestx + du, ax, bx);
            const double ny = std::clamp(besty + dv, ay, by);
            const double nd = (p - ypoint(nx, ny)).squaredNorm();
            const bool moved = std::fabs(nx - bestx) + std::fabs(ny - besty) >
                               1e-14 * (bx - ax);
            if (nd < bd) {
                bd = nd;
                bestx = nx;
                besty = ny;
            } else {
                break;
            }
            if (!moved) break;
        }
    }

    auto f = [&](double ux, double uy) {
        Vec u(2);
        u << ux, uy;
        const Mat dm = chart_dphi(c, u);
        const double speed = std::sqrt((dm.transpose() * dm).determinant());
        const double chi = c.pou ? c.pou(u) : 1.0;
        double det = 1.0;
        Vec y;
        if (delta != 0.0) {
            Vec curv;
            weingarten(c, u, orient, &curv);
            for (int k = 0; k < curv.size(); ++k) det *= 1.0 - delta * curv(k);
            y = c.phi(u) + delta * chart_normal(c, u, orient);
        } else {
            y = c.phi(u);
        }
        return green_radial(3, sp, (p - y).norm()) * chi * speed * det;
    };
    // graded corner rule only when the target is within a couple of cell
    // diameters; farther out the integrand is smooth (the window edge is a
    // gentle front) and a tensor Gauss rule beats the Duffy split
    const Vec mid = ypoint(0.5 * (ax + bx), 0.5 * (ay + by));
    const double diag = 0.5 * (ypoint(bx, by) - ypoint(ax, ay)).norm() +
                        0.5 * (ypoint(ax, by) - ypoint(bx, ay)).norm();
    if (std::sqrt(bd) > 1.5 * diag || (p - mid).norm() > 2.5 * diag) {
        const GaussRule gx = gauss_legendre_on(12, ax, bx);
        const GaussRule gy = gauss_legendre_on(12, ay, by);
        double s = 0.0;
        for (int kx = 0; kx < gx.order(); ++kx)
            for (int ky = 0; ky < gy.order(); ++ky) s += gx.w[kx] * gy.w[ky] * f(gx.x[kx], gy.x[ky]);
        return s;
    }
    return duffy_rect_integrate(f, ax, bx, ay, by, bestx, besty, 8);
}

// refined Gauss geometry of every d = 3 parameter cell, cached once per
// assembly; eval() is then a plain kernel sum against the cached points
struct CellGauss {
    int npc = 0; // points per cell
    std::vector<double> yx, yy, yz, c; // position and chi * speed * weight

    double eval(const SpectralParameter& sp, int j, const Vec& p) const
    {
        const int o0 = j * npc;
        const double px = p(0), py = p(1), pz = p(2);
        double s = 0.0;
        for (int k = o0; k < o0 + npc; ++k) {
            const double dx = px - yx[k], dy = py - yy[k], dz = pz - yz[k];
            s += c[k] * green_radial(3, sp, std::sqrt(dx * dx + dy * dy + dz * dz));
        }
        return s;
    }
};

CellGauss cache_cell_gauss(const SurfaceQuadrature& q, int ord)
{
    const int ns = q.size();
    CellGauss cg;
    cg.npc = ord * ord;
    cg.yx.resize(ns * cg.npc);
    cg.yy.resize(ns * cg.npc);
    cg.yz.resize(ns * cg.npc);
    cg.c.resize(ns * cg.npc);
    for (int j = 0; j < ns; ++j) {
        const auto& n = q.nodes[j];
        const Chart& c = q.surface->charts[n.chart];
        const GaussRule gx = gauss_legendre_on(ord, n.cell_lo(0), n.cell_hi(0));
        const GaussRule gy = gauss_legendre_on(ord, n.cell_lo(1), n.cell_hi(1));
        int k = j * cg.npc;
        for (int kx = 0; kx < ord; ++kx)
            for (int ky = 0; ky < ord; ++ky, ++k) {
                Vec u(2);
                u << gx.x[kx], gy.x[ky];
                const Mat dm = chart_dphi(c, u);
                const double speed = std::sqrt((dm.transpose() * dm).determinant());
                const double chi = c.pou ? c.pou(u) : 1.0;
                const Vec y = c.phi(u);
                cg.yx[k] = y(0);
                cg.yy[k] = y(1);
                cg.yz[k] = y(2);
                cg.c[k] = gx.w[kx] * gy.w[ky] * chi * speed;
            }
    }
    return cg;
}

double cell_int(const SpectralParameter& sp, const SurfaceQuadrature& q, int j,
                double delta, const Vec& p, const Vec* seed = nullptr)
{
    if (q.surface->d == 2) {
        const double h = seed ? (*seed)(0) : 0.0;
        return cell_int_d2(sp, q, j, delta, p, seed ? &h : nullptr);
    }
    return cell_int_d3(sp, q, j, delta, p, seed);
}

// geometry of one parameter cell sampled on a graded rule, so shifted-cell
// integrals reduce to plain kernel sums for any transverse offset
struct CellCache {
    std::vector<double> w, speed, curv, yx, yy, nx, ny;
};

CellCache build_cell_cache_d2(const SurfaceQuadrature& q, int j, double tstar,
                              int levels)
{
    const auto& n = q.nodes[j];
    const Chart& c = q.surface->charts[n.chart];
    const int orient = q.surface->orientation;
    const GradedRule r = graded_rule(n.cell_lo(0), n.cell_hi(0), tstar, 8, levels);
    CellCache cc;
    const size_t m = r.x.size();
    cc.w = r.w;
    cc.speed.resize(m);
    cc.curv.resize(m);
    cc.yx.resize(m);
    cc.yy.resize(m);
    cc.nx.resize(m);
    cc.ny.resize(m);
    Vec u(1);
    for (size_t k = 0; k < m; ++k) {
        u(0) = r.x[k];
        const Mat dm = chart_dphi(c, u);
        const double spd = dm.col(0).norm();
        const Vec nu = chart_normal(c, u, orient);
        const Vec y = c.phi(u);
        cc.speed[k] = spd;
        cc.curv[k] = nu.dot(chart_d2phi(c, u)[0]) / (spd * spd);
        cc.yx[k] = y(0);
        cc.yy[k] = y(1);
        cc.nx[k] = nu(0);
        cc.ny[k] = nu(1);
    }
    return cc;
}

double cell_cache_eval(const SpectralParameter& sp, const CellCache& cc,
                       const Vec& p, double delta)
{
    const double px = p(0), py = p(1);
    double s = 0.0;
    for (size_t k = 0; k < cc.w.size(); ++k) {
        const double dx = px - (cc.yx[k] + delta * cc.nx[k]);
        const double dy = py - (cc.yy[k] + delta * cc.ny[k]);
        const double r = std::sqrt(dx * dx + dy * dy);
        s += cc.w[k] * green_radial(2, sp, r) * cc.speed[k] *
             (1.0 - delta * cc.curv[k]);
    }
    return s;
}

// seed for the nearest-parameter search in cell j: node i's own parameter,
// unwrapped across periodic seams (usable only when both share a chart)
bool param_seed(const SurfaceQuadrature& q, int i, int j, Vec& seed)
{
    const auto& ni = q.nodes[i];
    const auto& nj = q.nodes[j];
    if (ni.chart != nj.chart) return false;
    const Chart& c = q.surface->charts[nj.chart];
    seed = ni.u;
    for (int k = 0; k < seed.size(); ++k) {
        if (k < static_cast<int>(c.periodic.size()) && c.periodic[k]) {
            const double P = c.hi(k) - c.lo(k);
            double dl = seed(k) - nj.u(k);
            dl -= P * std::round(dl / P);
            seed(k) = nj.u(k) + dl;
        }
    }
    return true;
}

// shifted node positions and the tube jacobians for a transverse offset delta
struct ShiftData {
    std::vector<Vec> y;
    std::vector<double> det;
};

ShiftData shift_nodes(const SurfaceQuadrature& q, double delta)
{
    ShiftData s;
    s.y.resize(q.size());
    s.det.resize(q.size());
    for (int j = 0; j < q.size(); ++j) {
        s.y[j] = q.nodes[j].x + delta * q.nodes[j].normal;
        s.det[j] = delta == 0.0 ? 1.0 : q.tube_jacobian(j, delta);
    }
    return s;
}

} // namespace

double operator_norm(const DiscreteOperator& d)
{
    if (d.w_out.minCoeff() <= 0.0 || d.w_in.minCoeff() <= 0.0)
        throw numerical_error("operator_norm: grid weights must be positive");
    Mat b = d.w_out.cwiseSqrt().asDiagonal() * d.a *
            d.w_in.cwiseSqrt().cwiseInverse().asDiagonal();
    if (std::max(b.rows(), b.cols()) <= 4000) return largest_singular_value(b);
    return power_iteration_norm(b);
}

double schur_bound(const DiscreteOperator& d)
{
    double r1 = 0.0;
    for (int i = 0; i < d.a.rows(); ++i) r1 = std::max(r1, d.a.row(i).cwiseAbs().sum());
    double r2 = 0.0;
    for (int j = 0; j < d.a.cols(); ++j) {
        double s = 0.0;
        for (int i = 0; i < d.a.rows(); ++i)
            s += std::fabs(d.a(i, j)) * d.w_out(i) / d.w_in(j);
        r2 = std::max(r2, s);
    }
    return std::sqrt(r1 * r2);
}

DiscreteOperator assemble_M(const SpectralParameter& sp, const SurfaceQuadrature& q)
{
    const int ns = q.size();
    const int d = q.surface->d;
    DiscreteOperator out;
    out.w_out = out.w_in = Vec(ns);
    for (int j = 0; j < ns; ++j) out.w_in(j) = q.nodes[j].w;
    out.w_out = out.w_in;

    if (d == 2 && q.closed_curve) {
        // spectrally accurate periodic log-quadrature
        std::vector<Vec> x(ns);
        std::vector<double> sp2(ns);
        const double scale = q.period / (2.0 * M_PI);
        for (int j = 0; j < ns; ++j) {
            x[j] = q.nodes[j].x;
            sp2[j] = q.nodes[j].speed * scale;
        }
        out.a = kress_single_layer(x, sp2, sp.kappa);
        return out;
    }

    const std::vector<double> len = node_scales(q);
    Mat m = Mat::Zero(ns, ns);

    if (d == 3) {
        // product integration: every entry is the cell integral of the kernel
        // against the blend-weighted surface measure, so row sums against
        // constants are exact to the per-cell rule error.  A punctured nodal
        // rule is not an option here: the hole boundary leaves an O(h^2)
        // lattice term whenever the target sits off-center in the other
        // chart's grid, and it does not shrink at desk-scale resolutions.
        // Cells are integrated from cached refined Gauss points (order 6 in
        // the mid range, order 3 far away); only cells the singularity can
        // touch get the graded corner treatment.
        const CellGauss g6 = cache_cell_gauss(q, 6), g3 = cache_cell_gauss(q, 3);
        for_each_row(ns, [&](std::ptrdiff_t i) {
            const Vec& p = q.nodes[i].x;
            for (int j = 0; j < ns; ++j) {
                const double r = (p - q.nodes[j].x).norm();
                const double scale = std::max(len[i], len[j]);
                if (r < NEAR_RADIUS * scale) {
                    Vec s1;
                    const bool hs = param_seed(q, static_cast<int>(i), j, s1);
                    m(i, j) = cell_int_d3(sp, q, j, 0.0, p, hs ? &s1 : nullptr);
                } else {
                    m(i, j) = (r < 6.0 * scale ? g6 : g3).eval(sp, j, p);
                }
            }
        });
        out.a = std::move(m);
        return out;
    }

    std::vector<std::pair<int, int>> near;
    for (int i = 0; i < ns; ++i) {
        for (int j = 0; j < ns; ++j) {
            const double r = (q.nodes[i].x - q.nodes[j].x).norm();
            if (r < NEAR_RADIUS * std::max(len[i], len[j])) {
                if (j >= i) near.emplace_back(i, j);
                continue;
            }
            m(i, j) = green_radial(d, sp, r) * q.nodes[j].w;
        }
    }
    for (auto [i, j] : near) {
        Vec s1, s2;
        const bool hs = param_seed(q, i, j, s1);
        const double c1 = cell_int(sp, q, j, 0.0, q.nodes[i].x, hs ? &s1 : nullptr);
        if (i == j) {
            m(i, i) = c1;
            continue;
        }
        param_seed(q, j, i, s2);
        const double c2 = cell_int(sp, q, i, 0.0, q.nodes[j].x, hs ? &s2 : nullptr);
        const double gsym = 0.5 * (c1 / q.nodes[j].w + c2 / q.nodes[i].w);
        m(i, j) = gsym * q.nodes[j].w;
        m(j, i) = gsym * q.nodes[i].w;
    }
    out.a = std::move(m);
    return out;
}

Mat averaged_kernel(const SpectralParameter& sp, const SurfaceQuadrature& q,
                    double delta, const std::vector<Vec>& pts, double near_margin)
{
    const int ns = q.size();
    const int np = static_cast<int>(pts.size());
    const ShiftData sh = shift_nodes(q, delta);
    const std::vector<double> len = node_scales(q);
    // classification by unshifted distance keeps the layout identical across
    // delta values (margin must cover the shift)
    const double margin = near_margin < 0.0 ? std::fabs(delta) : near_margin;
    Mat g(np, ns);
    std::atomic<bool> coincident{false};
    for_each_row(np, [&](std::ptrdiff_t k) {
        for (int j = 0; j < ns; ++j) {
            const double r = (pts[k] - sh.y[j]).norm();
            if (r < 1e-12) {
                coincident = true;
                g(k, j) = 0.0;
                continue;
            }
            const double r0 = (pts[k] - q.nodes[j].x).norm();
            if (r0 < NEAR_RADIUS * len[j] + margin) {
                g(k, j) = cell_int(sp, q, j, delta, pts[k]) /
                          (sh.det[j] * q.nodes[j].w);
            } else {
                g(k, j) = green_radial(q.surface->d, sp, r);
            }
        }
    });
    if (coincident)
        throw numerical_error("averaged_kernel: evaluation point coincides with a "
                              "shifted surface node; perturb the grid");
    return g;
}

DiscreteOperator assemble_gamma(const SpectralParameter& sp, const SurfaceQuadrature& q,
                                const VolumeGrid& vol)
{
    DiscreteOperator out;
    out.a = averaged_kernel(sp, q, 0.0, vol.points);
    out.w_in = Vec(q.size());
    for (int j = 0; j < q.size(); ++j) {
        out.w_in(j) = q.nodes[j].w;
        out.a.col(j) *= q.nodes[j].w;
    }
    out.w_out = vol.w;
    return out;
}

DiscreteOperator assemble_gamma_star(const SpectralParameter& sp,
                                     const SurfaceQuadrature& q, const VolumeGrid& vol)
{
    DiscreteOperator out;
    const Mat g = averaged_kernel(sp, q, 0.0, vol.points);
    out.a = g.transpose();
    for (int k = 0; k < vol.size(); ++k) out.a.col(k) *= vol.w(k);
    out.w_in = vol.w;
    out.w_out = Vec(q.size());
    for (int j = 0; j < q.size(); ++j) out.w_out(j) = q.nodes[j].w;
    return out;
}

namespace {

DiscreteOperator assemble_B_core(const SpectralParameter& sp, double eps,
                                 const ProductGrid& g, const PotentialData& pd,
                                 double margin)
{
    const SurfaceQuadrature& q = *g.surf;
    const int ns = q.size(), T = g.T(), n = ns * T;
    const int d = q.surface->d;

    DiscreteOperator out;
    out.w_out = out.w_in = Vec(n);

    std::vector<ShiftData> sh(T);
    for (int m = 0; m < T; ++m) sh[m] = shift_nodes(q, eps * g.trans.x[m]);
    for (int j = 0; j < ns; ++j)
        for (int m = 0; m < T; ++m)
            out.w_in(g.index(j, m)) = q.nodes[j].w * g.trans.w[m] * sh[m].det[j];
    out.w_out = out.w_in;

    const std::vector<double> len = node_scales(q);
    const bool kress = (d == 2 && q.closed_curve);
    const double scale = q.period / (2.0 * M_PI);

    // near classification by unshifted distance + margin, so the layout is
    // identical for every transverse offset and across the eps sweep
    auto is_near = [&](int i, int j) {
        const double r0 = (q.nodes[i].x - q.nodes[j].x).norm();
        return r0 < NEAR_RADIUS * std::max(len[i], len[j]) + margin;
    };

    if (eps == 0.0) {
        Mat b = Mat::Zero(n, n);
        if (kress) {
            // same-offset blocks get the periodic log-quadrature
            std::vector<Vec> x(ns);
            std::vector<double> spd(ns);
            for (int j = 0; j < ns; ++j) {
                x[j] = q.nodes[j].x;
                spd[j] = q.nodes[j].speed * scale;
            }
            const Mat S = kress_single_layer(x, spd, sp.kappa);
            for (int m = 0; m < T; ++m)
                for (int i = 0; i < ns; ++i)
                    for (int j = 0; j < ns; ++j)
                        b(g.index(i, m), g.index(j, m)) =
                            pd.u(g.index(i, m)) * S(i, j) * pd.v(g.index(j, m)) *
                            g.trans.w[m];
        }
        // all offsets collapse onto the surface: every non-kress block shares
        // the unshifted kernel, so assemble it once and broadcast
        Mat k0 = Mat::Zero(ns, ns);
        for_each_row(ns, [&](std::ptrdiff_t i) {
            for (int j = 0; j < ns; ++j) {
                if (is_near(static_cast<int>(i), j)) continue;
                k0(i, j) =
                    green_radial(d, sp, (q.nodes[i].x - q.nodes[j].x).norm());
            }
        });
        std::vector<std::pair<int, int>> near0;
        for (int i = 0; i < ns; ++i)
            for (int j = i; j < ns; ++j)
                if (is_near(i, j)) near0.emplace_back(i, j);
        std::vector<double> g0(near0.size());
        for_each_row(static_cast<std::ptrdiff_t>(near0.size()),
                     [&](std::ptrdiff_t k) {
                         const auto [i, j] = near0[k];
                         Vec s1, s2;
                         const bool hs = param_seed(q, i, j, s1);
                         const double c1 = cell_int(sp, q, j, 0.0, q.nodes[i].x,
                                                    hs ? &s1 : nullptr);
                         if (i == j) {
                             g0[k] = c1 / q.nodes[j].w;
                             return;
                         }
                         param_seed(q, j, i, s2);
                         const double c2 = cell_int(sp, q, i, 0.0, q.nodes[j].x,
                                                    hs ? &s2 : nullptr);
                         g0[k] = 0.5 * (c1 / q.nodes[j].w + c2 / q.nodes[i].w);
                     });
        for (size_t k = 0; k < near0.size(); ++k) {
            const auto [i, j] = near0[k];
            k0(i, j) = k0(j, i) = g0[k];
        }
        for_each_row(n, [&](std::ptrdiff_t row) {
            const int i = static_cast<int>(row) / T;
            const int m1 = static_cast<int>(row) % T;
            for (int m2 = 0; m2 < T; ++m2) {
                if (kress && m1 == m2) continue;
                for (int j = 0; j < ns; ++j)
                    b(row, g.index(j, m2)) = pd.u(row) * k0(i, j) *
                                             q.nodes[j].w * pd.v(g.index(j, m2)) *
                                             g.trans.w[m2];
            }
        });
        out.a = std::move(b);
        return out;
    }

    if (d == 2) {
        // pulling the diagonal u and v det w omega factors out leaves a
        // symmetric kernel matrix: fill its lower triangle column-wise
        // (cache-friendly), mirror, and scale at the end
        Mat gm = Mat::Zero(n, n);
        for_each_row(n, [&](std::ptrdiff_t col) {
            const int j = static_cast<int>(col) / T, m2 = static_cast<int>(col) % T;
            for (std::ptrdiff_t row = col + 1; row < n; ++row) {
                const int i = static_cast<int>(row) / T, m1 = static_cast<int>(row) % T;
                if ((kress && m1 == m2) || is_near(i, j)) continue;
                gm(row, col) =
                    green_radial(2, sp, (sh[m1].y[i] - sh[m2].y[j]).norm());
            }
        });
        gm.triangularView<Eigen::StrictlyUpper>() = gm.transpose();
        if (kress) {
            // same-offset blocks live on a shifted parallel curve; reuse the
            // periodic log-quadrature there (the tube jacobian is exactly the
            // speed ratio of the parallel curve)
            for (int m = 0; m < T; ++m) {
                std::vector<double> spd(ns);
                for (int j = 0; j < ns; ++j)
                    spd[j] = q.nodes[j].speed * scale * sh[m].det[j];
                const Mat S = kress_single_layer(sh[m].y, spd, sp.kappa);
                for (int j = 0; j < ns; ++j) {
                    const double wj = sh[m].det[j] * q.nodes[j].w;
                    for (int i = 0; i < ns; ++i)
                        gm(g.index(i, m), g.index(j, m)) = S(i, j) / wj;
                }
            }
        }
        // near entries: per pair, sample the two cells' chart geometry once on
        // graded rules, then sweep every offset combination as a kernel sum
        std::vector<std::pair<int, int>> np;
        for (int i = 0; i < ns; ++i)
            for (int j = i; j < ns; ++j)
                if (is_near(i, j)) np.emplace_back(i, j);
        std::vector<double> dl(T);
        for (int m = 0; m < T; ++m) dl[m] = eps * g.trans.x[m];
        double minsp = std::numeric_limits<double>::infinity();
        for (int m = 1; m < T; ++m) minsp = std::min(minsp, dl[m] - dl[m - 1]);
        // distinct pairs touch disjoint entry blocks, so parallel fill is safe
        for_each_row(static_cast<std::ptrdiff_t>(np.size()), [&](std::ptrdiff_t k) {
            const auto [i, j] = np[k];
            Vec s1, s2;
            const bool hs = param_seed(q, i, j, s1);
            const double h1 = hs ? s1(0) : 0.0;
            const auto [t1, gap1] =
                nearest_param_d2(q, j, 0.0, q.nodes[i].x, hs ? &h1 : nullptr);
            const double cw1 = q.nodes[j].cell_hi(0) - q.nodes[j].cell_lo(0);
            // grading depth from the closest approach any offset pair can make
            const double gmin1 =
                i != j ? 0.5 * gap1 : (kress ? minsp : 1e-14);
            const CellCache cj =
                build_cell_cache_d2(q, j, t1, graded_levels(cw1, gmin1));
            CellCache ci;
            if (i != j) {
                param_seed(q, j, i, s2);
                const double h2 = hs ? s2(0) : 0.0;
                const auto [t2, gap2] =
                    nearest_param_d2(q, i, 0.0, q.nodes[j].x, hs ? &h2 : nullptr);
                const double cw2 = q.nodes[i].cell_hi(0) - q.nodes[i].cell_lo(0);
                ci = build_cell_cache_d2(q, i, t2, graded_levels(cw2, 0.5 * gap2));
            }
            for (int m1 = 0; m1 < T; ++m1)
                for (int m2 = (i == j ? m1 : 0); m2 < T; ++m2) {
                    if (kress && m1 == m2) continue;
                    const double c1 = cell_cache_eval(sp, cj, sh[m1].y[i], dl[m2]);
                    double gs;
                    if (i == j && m1 == m2) {
                        gs = c1 / (sh[m2].det[j] * q.nodes[j].w);
                    } else {
                        const CellCache& other = i == j ? cj : ci;
                        const double c2 =
                            cell_cache_eval(sp, other, sh[m2].y[j], dl[m1]);
                        gs = 0.5 * (c1 / (sh[m2].det[j] * q.nodes[j].w) +
                                    c2 / (sh[m1].det[i] * q.nodes[i].w));
                    }
                    const int r1 = g.index(i, m1), r2 = g.index(j, m2);
                    gm(r1, r2) = gm(r2, r1) = gs;
                }
        });
        gm.array().colwise() *= pd.u.array();
        const Vec cw = pd.v.cwiseProduct(out.w_in);
        gm.array().rowwise() *= cw.transpose().array();
        out.a = std::move(gm);
        return out;
    }

    // d == 3: generic far fill plus symmetrized near-pair re-integration
    Mat b = Mat::Zero(n, n);
    for_each_row(n, [&](std::ptrdiff_t row) {
        const int i = static_cast<int>(row) / T, m1 = static_cast<int>(row) % T;
        for (int m2 = 0; m2 < T; ++m2)
            for (int j = 0; j < ns; ++j) {
                if (is_near(i, j)) continue;
                const double r = (sh[m1].y[i] - sh[m2].y[j]).norm();
                b(row, g.index(j, m2)) = pd.u(row) * green_radial(d, sp, r) *
                                         sh[m2].det[j] * q.nodes[j].w *
                                         pd.v(g.index(j, m2)) * g.trans.w[m2];
            }
    });

    struct NearPair {
        int i, m1, j, m2;
    };
    std::vector<NearPair> pairs;
    for (int m1 = 0; m1 < T; ++m1)
        for (int m2 = m1; m2 < T; ++m2) {
            if (kress && m1 == m2) continue;
            for (int i = 0; i < ns; ++i) {
                const int j0 = (m1 == m2) ? i : 0;
                for (int j = j0; j < ns; ++j)
                    if (is_near(i, j)) pairs.push_back({i, m1, j, m2});
            }
        }
    std::vector<double> gsym(pairs.size());
    for_each_row(static_cast<std::ptrdiff_t>(pairs.size()), [&](std::ptrdiff_t k) {
        const auto& pr = pairs[k];
        Vec s1, s2;
        const bool hs = param_seed(q, pr.i, pr.j, s1);
        const double c1 = cell_int(sp, q, pr.j, eps * g.trans.x[pr.m2],
                                   sh[pr.m1].y[pr.i], hs ? &s1 : nullptr);
        if (pr.i == pr.j && pr.m1 == pr.m2) {
            gsym[k] = c1 / (sh[pr.m2].det[pr.j] * q.nodes[pr.j].w);
            return;
        }
        param_seed(q, pr.j, pr.i, s2);
        const double c2 = cell_int(sp, q, pr.i, eps * g.trans.x[pr.m1],
                                   sh[pr.m2].y[pr.j], hs ? &s2 : nullptr);
        gsym[k] = 0.5 * (c1 / (sh[pr.m2].det[pr.j] * q.nodes[pr.j].w) +
                         c2 / (sh[pr.m1].det[pr.i] * q.nodes[pr.i].w));
    });
    for (size_t k = 0; k < pairs.size(); ++k) {
        const auto& pr = pairs[k];
        const int r1 = g.index(pr.i, pr.m1), r2 = g.index(pr.j, pr.m2);
        b(r1, r2) = pd.u(r1) * gsym[k] * sh[pr.m2].det[pr.j] * q.nodes[pr.j].w *
                    pd.v(r2) * g.trans.w[pr.m2];
        b(r2, r1) = pd.u(r2) * gsym[k] * sh[pr.m1].det[pr.i] * q.nodes[pr.i].w *
                    pd.v(r1) * g.trans.w[pr.m1];
    }
    out.a = std::move(b);
    return out;
}

} // namespace

DiscreteOperator assemble_B_eps(const SpectralParameter& sp, double eps,
                                const ProductGrid& g, const PotentialData& pd,
                                double near_margin)
{
    const SurfaceQuadrature& q = *g.surf;
    const int ns = q.size(), T = g.T(), n = ns * T;
    if (eps < 0.0 || eps > q.surface->beta + 1e-14)
        throw config_error("assemble_B_eps: eps must lie in [0, beta]");

    if (eps == 0.0) {
        // exact collapse onto the surface operator
        const DiscreteOperator m = assemble_M(sp, q);
        DiscreteOperator out;
        out.a = Mat(n, n);
        out.w_in = Vec(n);
        for (int i = 0; i < ns; ++i)
            for (int m1 = 0; m1 < T; ++m1) {
                const int row = g.index(i, m1);
                for (int j = 0; j < ns; ++j)
                    for (int m2 = 0; m2 < T; ++m2)
                        out.a(row, g.index(j, m2)) = pd.u(row) * m.a(i, j) *
                                                     pd.v(g.index(j, m2)) *
                                                     g.trans.w[m2];
            }
        for (int j = 0; j < ns; ++j)
            for (int m2 = 0; m2 < T; ++m2)
                out.w_in(g.index(j, m2)) = q.nodes[j].w * g.trans.w[m2];
        out.w_out = out.w_in;
        return out;
    }
    // classification is by unshifted distance, which normal shifts can only
    // grow (up to the bounded tube contraction), so no default margin needed
    return assemble_B_core(sp, eps, g, pd, near_margin < 0.0 ? 0.0 : near_margin);
}

DiscreteOperator assemble_B0_matched(const SpectralParameter& sp, const ProductGrid& g,
                                     const PotentialData& pd, double near_margin)
{
    return assemble_B_core(sp, 0.0, g, pd, near_margin);
}

std::pair<DiscreteOperator, DiscreteOperator> assemble_AC_eps(
    const SpectralParameter& sp, double eps, const ProductGrid& g,
    const PotentialData& pd, const VolumeGrid& vol, double near_margin)
{
    const SurfaceQuadrature& q = *g.surf;
    const int ns = q.size(), T = g.T(), n = ns * T, nv = vol.size();
    if (eps < 0.0 || eps > q.surface->beta + 1e-14)
        throw config_error("assemble_AC_eps: eps must lie in [0, beta]");

    DiscreteOperator A, C;
    A.a = Mat(nv, n);
    C.a = Mat(n, nv);
    A.w_out = vol.w;
    C.w_in = vol.w;
    A.w_in = C.w_out = Vec(n);

    Mat g0;
    if (eps == 0.0) g0 = averaged_kernel(sp, q, 0.0, vol.points, near_margin);
    for (int m = 0; m < T; ++m) {
        const double delta = eps * g.trans.x[m];
        const Mat gm =
            eps == 0.0 ? g0 : averaged_kernel(sp, q, delta, vol.points, near_margin);
        for (int j = 0; j < ns; ++j) {
            const double det = eps == 0.0 ? 1.0 : q.tube_jacobian(j, delta);
            const int col = g.index(j, m);
            A.w_in(col) = q.nodes[j].w * g.trans.w[m] * det;
            const double aw = pd.v(col) * det * q.nodes[j].w * g.trans.w[m];
            const double cw = pd.u(col);
            for (int k = 0; k < nv; ++k) {
                A.a(k, col) = gm(k, j) * aw;
                C.a(col, k) = cw * gm(k, j) * vol.w(k);
            }
        }
    }
    C.w_out = A.w_in;
    return {std::move(A), std::move(C)};
}

DiscreteOperator assemble_A_eps(const SpectralParameter& sp, double eps,
                                const ProductGrid& g, const PotentialData& pd,
                                const VolumeGrid& vol)
{
    return assemble_AC_eps(sp, eps, g, pd, vol).first;
}

DiscreteOperator assemble_C_eps(const SpectralParameter& sp, double eps,
                                const ProductGrid& g, const PotentialData& pd,
                                const VolumeGrid& vol)
{
    return assemble_AC_eps(sp, eps, g, pd, vol).second;
}

DiscreteOperator free_resolvent(const SpectralParameter& sp, const VolumeGrid& vol)
{
    const int nv = vol.size();
    const int d = vol.box_lo.size();
    DiscreteOperator out;
    out.a = Mat(nv, nv);
    out.w_out = out.w_in = vol.w;
    const double k = sp.kappa;
    for_each_row(nv, [&](std::ptrdiff_t i) {
        for (int j = 0; j < nv; ++j) {
            if (j == static_cast<int>(i)) {
                // equal-measure disk/ball average around the node
                if (d == 2) {
                    const double r0 = std::sqrt(vol.w(j) / M_PI);
                    out.a(i, j) = (1.0 - k * r0 * bessel_k1(k * r0)) / (k * k);
                } else {
                    const double r0 = std::cbrt(3.0 * vol.w(j) / (4.0 * M_PI));
                    out.a(i, j) =
                        (1.0 - std::exp(-k * r0) * (1.0 + k * r0)) / (k * k);
                }
                continue;
            }
            const double r = (vol.points[i] - vol.points[j]).norm();
            out.a(i, j) = green_radial(d, sp, r) * vol.w(j);
        }
    });
    return out;
}

Mat krein_correction(const SpectralParameter& sp, const SurfaceQuadrature& q,
                     const Vec& alpha, const VolumeGrid& vol)
{
    const DiscreteOperator m = assemble_M(sp, q);
    Mat sys = Mat::Identity(q.size(), q.size()) - alpha.asDiagonal() * m.a;
    if (smallest_singular_value(sys) < 1e-8)
        throw numerical_error("krein_correction: 1 - alpha M nearly singular; "
                              "lambda sits too close to an eigenvalue");
    const DiscreteOperator gam = assemble_gamma(sp, q, vol);
    const DiscreteOperator gst = assemble_gamma_star(sp, q, vol);
    LuFactor lu;
    lu.factor(sys);
    const Mat x = lu.solve(alpha.asDiagonal() * gst.a);
    return matmul(gam.a, x);
}

Vec krein_resolvent_apply(const SpectralParameter& sp, const SurfaceQuadrature& q,
                          const Vec& alpha, const VolumeGrid& vol, const Vec& f)
{
    const DiscreteOperator r = free_resolvent(sp, vol);
    if (alpha.cwiseAbs().maxCoeff() == 0.0) return r.a * f;
    return r.a * f + krein_correction(sp, q, alpha, vol) * f;
}

Mat heps_correction(const SpectralParameter& sp, double eps, const ProductGrid& g,
                    const PotentialData& pd, const VolumeGrid& vol)
{
    const DiscreteOperator b = assemble_B_eps(sp, eps, g, pd);
    const double nb = operator_norm(b);
    if (nb >= 1.0)
        throw numerical_error("heps_correction: ||B_eps(lambda)|| = " +
                              std::to_string(nb) +
                              " >= 1; pick a more negative lambda");
    auto [A, C] = assemble_AC_eps(sp, eps, g, pd, vol);
    LuFactor lu;
    lu.factor(Mat::Identity(b.a.rows(), b.a.cols()) - b.a);
    return matmul(A.a, lu.solve(C.a));
}

Vec heps_resolvent_apply(const SpectralParameter& sp, double eps, const ProductGrid& g,
                         const PotentialData& pd, const VolumeGrid& vol, const Vec& f)
{
    const DiscreteOperator r = free_resolvent(sp, vol);
    if (pd.u.cwiseAbs().maxCoeff() == 0.0) return r.a * f;
    return r.a * f + heps_correction(sp, eps, g, pd, vol) * f;
}

double find_lambda_M(const ProductGrid& g, const PotentialData& pd,
                     const std::vector<double>& eps_list, double lambda_start)
{
    auto max_norm = [&](double lam) {
        const SpectralParameter sp(lam);
        double mx = 0.0;
        for (double e : eps_list)
            mx = std::max(mx, operator_norm(assemble_B_eps(sp, e, g, pd)));
        return mx;
    };
    double lam = lambda_start;
    double bad = 0.0; // 0 marks "no failing endpoint seen"
    while (max_norm(lam) > 0.5) {
        bad = lam;
        lam *= 2.0;
        if (lam < -1.1e6)
            throw numerical_error("find_lambda_M: no lambda with ||B|| <= 1/2 found");
    }
    if (bad == 0.0) return lam;
    double good = lam;
    for (int it = 0; it < 6; ++it) {
        const double mid = 0.5 * (good + bad);
        if (max_norm(mid) <= 0.5)
            good = mid;
        else
            bad = mid;
    }
    return good;
}

} // namespace ds
