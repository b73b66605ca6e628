#include <algorithm>
#include <cmath>
#include <memory>

#include "deltashell/geometry.hpp"
#include "deltashell/quadrules.hpp"

namespace ds {

GaussRule gauss_legendre(int n)
{
    if (n < 1) throw config_error("gauss_legendre: order must be >= 1");
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
        // Newton from the Chebyshev-like initial guess
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) {
                p0 = 1.0;
                p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                const double d2 = n * (x * p1 - p0) / (x * x - 1.0);
                r.x[n - 1 - i] = x;
                r.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * d2 * d2);
                break;
            }
        }
    }
    return r;
}

GaussRule gauss_legendre_on(int n, double a, double b)
{
    GaussRule g = gauss_legendre(n);
    for (int i = 0; i < n; ++i) {
        g.x[i] = 0.5 * (a + b) + 0.5 * (b - a) * g.x[i];
        g.w[i] *= 0.5 * (b - a);
    }
    return g;
}

namespace {

QuadNode make_node(const Hypersurface& h, int chart_id, const Vec& u, double rule_w)
{
    const Chart& c = h.charts[chart_id];
    QuadNode n;
    n.chart = chart_id;
    n.u = u;
    n.x = c.phi(u);
    const Mat d = chart_dphi(c, u);
    {
        Eigen::JacobiSVD<Mat> svd(d);
        if (svd.singularValues()(svd.singularValues().size() - 1) < 1e-8)
            throw geometry_error("build_quadrature: rank-deficient chart derivative");
    }
    const Mat g = d.transpose() * d;
    n.speed = std::sqrt(g.determinant());
    const double chi = c.pou ? c.pou(u) : 1.0;
    n.w = chi * n.speed * rule_w;
    n.normal = chart_normal(c, u, h.orientation);
    n.L = weingarten(c, u, h.orientation, &n.curv);
    return n;
}

} // namespace

SurfaceQuadrature build_quadrature(const Hypersurface& h, int N)
{
    if (N < 8) throw config_error("build_quadrature: need N >= 8 per chart");
    SurfaceQuadrature q;
    q.surface = std::make_shared<Hypersurface>(h);

    if (h.d == 2) {
        if (h.charts.size() != 1)
            throw config_error("build_quadrature: d=2 shapes use a single chart");
        const Chart& c = h.charts[0];
        const double lo = c.lo(0), hi = c.hi(0), len = hi - lo;
        const bool periodic = !c.periodic.empty() && c.periodic[0];
        if (periodic && h.closed) {
            if (N % 2 != 0)
                throw config_error("build_quadrature: periodic rule needs even N");
            q.closed_curve = true;
            q.period = len;
            const double du = len / N;
            for (int j = 0; j < N; ++j) {
                Vec u(1);
                u << lo + j * du;
                QuadNode n = make_node(h, 0, u, du);
                n.cell_lo = Vec::Constant(1, u(0) - 0.5 * du);
                n.cell_hi = Vec::Constant(1, u(0) + 0.5 * du);
                q.nodes.push_back(std::move(n));
            }
        } else {
            const double du = len / N;
            for (int j = 0; j < N; ++j) {
                Vec u(1);
                u << lo + (j + 0.5) * du;
                QuadNode n = make_node(h, 0, u, du);
                n.cell_lo = Vec::Constant(1, u(0) - 0.5 * du);
                n.cell_hi = Vec::Constant(1, u(0) + 0.5 * du);
                q.nodes.push_back(std::move(n));
            }
        }
        return q;
    }

    if (h.d != 3) throw config_error("build_quadrature: only d = 2, 3 shapes ship");

    for (size_t ci = 0; ci < h.charts.size(); ++ci) {
        const Chart& c = h.charts[ci];
        if (!c.periodic[1]) {
            // uniform midpoint grid; the blend weight is flat-zero at the
            // chart edge, so the composite rule converges superalgebraically
            // (half-step offset on every second chart so overlap nodes never
            // coincide)
            const double dx = (c.hi(0) - c.lo(0)) / N;
            const double dy = (c.hi(1) - c.lo(1)) / N;
            const double off = (ci % 2 == 1) ? 0.25 : 0.0;
            for (int i = 0; i < N; ++i) {
                for (int j = 0; j < N; ++j) {
                    Vec u(2);
                    u << c.lo(0) + (i + 0.5 + off) * dx, c.lo(1) + (j + 0.5 + off) * dy;
                    if (!c.contains(u)) continue;
                    QuadNode n = make_node(h, static_cast<int>(ci), u, dx * dy);
                    if (n.w <= 0.0) continue; // chi vanishes there
                    n.cell_lo = Vec(2);
                    n.cell_hi = Vec(2);
                    n.cell_lo << u(0) - 0.5 * dx, u(1) - 0.5 * dy;
                    n.cell_hi << u(0) + 0.5 * dx, u(1) + 0.5 * dy;
                    q.nodes.push_back(std::move(n));
                }
            }
            continue;
        }
        // polar-type chart: Gauss in the first coordinate, periodic uniform
        // in the second (half-step offset on the second chart so no two nodes
        // coincide in the overlap)
        const double tlo = c.lo(0), thi = c.hi(0);
        const int ntheta = N, nphi = 2 * N;
        const GaussRule gth = gauss_legendre_on(ntheta, tlo, thi);
        const double dphi = (c.hi(1) - c.lo(1)) / nphi;
        const double off = (ci % 2 == 1) ? 0.5 : 0.0;

        // theta cells from cumulative Gauss weights
        std::vector<double> edge(ntheta + 1);
        edge[0] = tlo;
        for (int i = 0; i < ntheta; ++i) edge[i + 1] = edge[i] + gth.w[i];
        edge[ntheta] = thi;

        for (int i = 0; i < ntheta; ++i) {
            if (!(edge[i] < gth.x[i] && gth.x[i] < edge[i + 1]))
                throw numerical_error("build_quadrature: Gauss node left its weight cell");
            for (int j = 0; j < nphi; ++j) {
                Vec u(2);
                u << gth.x[i], c.lo(1) + (j + off) * dphi;
                QuadNode n = make_node(h, static_cast<int>(ci), u, gth.w[i] * dphi);
                if (n.w < 1e-14) continue; // chi vanishes there
                n.cell_lo = Vec(2);
                n.cell_hi = Vec(2);
                n.cell_lo << edge[i], u(1) - 0.5 * dphi;
                n.cell_hi << edge[i + 1], u(1) + 0.5 * dphi;
                q.nodes.push_back(std::move(n));
            }
        }
    }
    // blend-edge nodes with a vanishing partition-of-unity weight would blow
    // up the W^{1/2} similarity used for norms and eigenvalues; the blend is
    // flat there, so dropping them relative to the largest weight costs
    // nothing measurable
    double wmax = 0.0;
    for (const auto& n : q.nodes) wmax = std::max(wmax, n.w);
    std::erase_if(q.nodes, [wmax](const QuadNode& n) { return n.w < 1e-10 * wmax; });
    return q;
}

} // namespace ds
