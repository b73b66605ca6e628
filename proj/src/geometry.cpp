#include "deltashell/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ds {

bool Chart::contains(const Vec& u) const
{
    for (int i = 0; i < param_dim(); ++i) {
        if (periodic.size() > static_cast<size_t>(i) && periodic[i]) continue;
        if (u(i) < lo(i) - 1e-12 || u(i) > hi(i) + 1e-12) return false;
    }
    return true;
}

namespace {

double fd_h(const Chart& c)
{
    if (c.fd_step > 0.0) return c.fd_step;
    const double width = (c.hi - c.lo).maxCoeff();
    return width * 1e-5;
}

void require_inside(const Chart& c, const Vec& u, const char* who)
{
    if (!c.contains(u))
        throw geometry_error(std::string(who) + ": parameter point outside chart domain");
}

} // namespace

Mat chart_dphi(const Chart& c, const Vec& u)
{
    require_inside(c, u, "chart_dphi");
    if (c.dphi) return c.dphi(u);
    const int p = c.param_dim();
    const double h = fd_h(c);
    Mat d(c.ambient_dim, p);
    for (int j = 0; j < p; ++j) {
        Vec up = u, um = u;
        up(j) += h;
        um(j) -= h;
        d.col(j) = (c.phi(up) - c.phi(um)) / (2.0 * h);
    }
    return d;
}

std::vector<Vec> chart_d2phi(const Chart& c, const Vec& u)
{
    require_inside(c, u, "chart_d2phi");
    const int p = c.param_dim();
    if (c.d2phi) return c.d2phi(u);
    const double h = fd_h(c);
    std::vector<Vec> out(p * p);
    for (int j = 0; j < p; ++j) {
        for (int k = 0; k < p; ++k) {
            Vec upp = u, upm = u, ump = u, umm = u;
            upp(j) += h; upp(k) += h;
            upm(j) += h; upm(k) -= h;
            ump(j) -= h; ump(k) += h;
            umm(j) -= h; umm(k) -= h;
            out[j * p + k] = (c.phi(upp) - c.phi(upm) - c.phi(ump) + c.phi(umm)) / (4.0 * h * h);
        }
    }
    return out;
}

Mat metric_tensor(const Chart& c, const Vec& u)
{
    const Mat d = chart_dphi(c, u);
    return d.transpose() * d;
}

Vec chart_normal(const Chart& c, const Vec& u, int orientation)
{
    require_inside(c, u, "chart_normal");
    if (c.normal) return static_cast<double>(orientation) * c.normal(u);
    const Mat d = chart_dphi(c, u);
    Vec n(c.ambient_dim);
    if (c.ambient_dim == 2) {
        n << d(1, 0), -d(0, 0);
    } else if (c.ambient_dim == 3) {
        const Eigen::Vector3d a = d.col(0), b = d.col(1);
        n = a.cross(b);
    } else {
        throw config_error("chart_normal: only d = 2, 3 supported");
    }
    const double len = n.norm();
    if (len < 1e-14) throw geometry_error("chart_normal: degenerate tangent space");
    return static_cast<double>(orientation) * n / len;
}

Mat weingarten(const Chart& c, const Vec& u, int orientation, Vec* curvatures)
{
    const Mat g = metric_tensor(c, u);
    const int p = c.param_dim();
    {
        Eigen::JacobiSVD<Mat> svd(g);
        const auto& sv = svd.singularValues();
        if (sv(sv.size() - 1) <= 0.0 || sv(0) / sv(sv.size() - 1) > 1e12)
            throw geometry_error("weingarten: metric tensor numerically degenerate");
    }
    const Vec nu = chart_normal(c, u, orientation);
    const std::vector<Vec> dd = chart_d2phi(c, u);
    Mat ii(p, p); // second fundamental form: II_jk = nu . d2phi_jk
    for (int j = 0; j < p; ++j)
        for (int k = 0; k < p; ++k) ii(j, k) = nu.dot(dd[j * p + k]);
    ii = 0.5 * (ii + ii.transpose().eval());
    const Mat L = g.llt().solve(ii);
    if (curvatures) {
        Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(ii, g);
        *curvatures = es.eigenvalues();
    }
    return L;
}

Vec Hypersurface::normal_at(int chart, const Vec& u) const
{
    return chart_normal(charts.at(chart), u, orientation);
}

double SurfaceQuadrature::total_weight() const
{
    double s = 0.0;
    for (const auto& n : nodes) s += n.w;
    return s;
}

double SurfaceQuadrature::tube_jacobian_raw(int j, double t) const
{
    const auto& n = nodes.at(j);
    double det = 1.0;
    for (int k = 0; k < n.curv.size(); ++k) det *= 1.0 - t * n.curv(k);
    return det;
}

double SurfaceQuadrature::tube_jacobian(int j, double t) const
{
    const double beta = surface->beta;
    if (std::fabs(t) >= beta)
        throw geometry_error("tube_jacobian: |t| must be < beta");
    const double det = tube_jacobian_raw(j, t);
    const double eta = surface->eta;
    if (det <= 1.0 - eta || det >= 1.0 + eta)
        throw geometry_error("tube_jacobian: det(1 - tW) = " + std::to_string(det) +
                             " outside (1-eta, 1+eta), eta = " + std::to_string(eta));
    return det;
}

HypothesisReport hypothesis_check(const Hypersurface& h, double beta, int density)
{
    HypothesisReport rep;
    const int nt = 7;

    struct Sample {
        Vec point;   // iota(u, t)
        Vec base;    // phi(u)
        double t;
        int chart;
        Vec u;
    };
    std::vector<Sample> samples;

    for (size_t ci = 0; ci < h.charts.size(); ++ci) {
        const Chart& c = h.charts[ci];
        const int p = c.param_dim();
        std::vector<Vec> params;
        if (p == 1) {
            for (int i = 0; i < density; ++i) {
                Vec u(1);
                const bool per = !c.periodic.empty() && c.periodic[0];
                const double f = per ? (i + 0.0) / density : (i + 0.5) / density;
                u(0) = c.lo(0) + f * (c.hi(0) - c.lo(0));
                params.push_back(u);
            }
        } else {
            const int n1 = density, n2 = density;
            for (int i = 0; i < n1; ++i)
                for (int j = 0; j < n2; ++j) {
                    Vec u(2);
                    u(0) = c.lo(0) + (i + 0.5) / n1 * (c.hi(0) - c.lo(0));
                    u(1) = c.lo(1) + (j + 0.0) / n2 * (c.hi(1) - c.lo(1));
                    params.push_back(u);
                }
        }
        for (const Vec& u : params) {
            const Vec x = c.phi(u);
            const Vec nu = chart_normal(c, u, h.orientation);
            Vec curv;
            weingarten(c, u, h.orientation, &curv);
            // Lipschitz constant of phi (sampled below via pairs)
            for (int it = 0; it < nt; ++it) {
                const double t = -beta + (it + 0.5) * 2.0 * beta / nt;
                double det = 1.0;
                for (int k = 0; k < curv.size(); ++k) det *= 1.0 - t * curv(k);
                rep.eta_est = std::max(rep.eta_est, std::fabs(det - 1.0));
                Sample s;
                s.point = x + t * nu;
                s.base = x;
                s.t = t;
                s.chart = static_cast<int>(ci);
                s.u = u;
                samples.push_back(std::move(s));
            }
        }
    }
    rep.det_ok = rep.eta_est < 1.0;

    // pairwise displacement ratios (hypothesis (c)) and injectivity
    double min_ratio = std::numeric_limits<double>::infinity();
    double max_lip = 0.0;
    for (size_t a = 0; a < samples.size(); ++a) {
        for (size_t b = a + 1; b < samples.size(); ++b) {
            const Sample& sa = samples[a];
            const Sample& sb = samples[b];
            const double dist2 = (sa.point - sb.point).squaredNorm();
            const double base2 = (sa.base - sb.base).squaredNorm();
            const double dt = sa.t - sb.t;
            if (dist2 < 1e-16 && (base2 > 1e-16 || dt * dt > 1e-16)) {
                // distinct tube coordinates, identical image
                if (base2 > 1e-16 || std::fabs(dt) > 1e-8) rep.injective = false;
            }
            if (sa.chart != sb.chart) continue;
            const Chart& c = h.charts[sa.chart];
            double du2 = 0.0;
            for (int k = 0; k < c.param_dim(); ++k) {
                double dk = sa.u(k) - sb.u(k);
                if (!c.periodic.empty() && c.periodic[k]) {
                    const double per = c.hi(k) - c.lo(k);
                    dk = std::fabs(dk);
                    dk = std::min(dk, per - dk);
                }
                du2 += dk * dk;
            }
            const double denom = du2 + dt * dt;
            if (denom < 1e-16) continue;
            min_ratio = std::min(min_ratio, dist2 / denom);
            if (du2 > 1e-16) max_lip = std::max(max_lip, std::sqrt(base2 / du2));
        }
    }
    rep.c_est = std::isfinite(min_ratio) ? std::sqrt(min_ratio) : 0.0;
    rep.lipschitz_est = max_lip;
    rep.bilipschitz_ok = rep.c_est > 1e-3;
    return rep;
}

} // namespace ds
