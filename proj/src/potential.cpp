#include "deltashell/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ds {

TransversePotential make_potential(const std::string& profile, double beta,
                                   double amplitude)
{
    if (!(beta > 0.0)) throw config_error("make_potential: beta must be positive");
    TransversePotential V;
    V.profile = profile;
    V.beta = beta;
    V.a = [amplitude](const Vec&) { return amplitude; };
    if (profile == "box") {
        V.q = [](double t) { return std::fabs(t) < 1.0 ? 0.5 : 0.0; };
    } else if (profile == "gaussian") {
        V.q = [](double t) { return std::fabs(t) < 1.0 ? std::exp(-8.0 * t * t) : 0.0; };
    } else if (profile == "tilted_box") {
        // same transversal average as the box (the odd part integrates to
        // zero) but no parity symmetry, so first-order resolvent terms do not
        // cancel and the generic convergence rate is visible
        V.q = [](double t) { return std::fabs(t) < 1.0 ? 0.5 * (1.0 + t) : 0.0; };
    } else if (profile == "two_bump") {
        V.q = [](double t) {
            if (std::fabs(t) >= 1.0) return 0.0;
            return std::exp(-20.0 * (t - 0.4) * (t - 0.4)) -
                   0.5 * std::exp(-12.0 * (t + 0.3) * (t + 0.3));
        };
        V.nonnegative = false;
    } else if (profile == "zero") {
        V.q = [](double) { return 0.0; };
        V.a = [](const Vec&) { return 0.0; };
    } else {
        throw config_error("make_potential: unknown profile '" + profile + "'");
    }
    if (amplitude < 0.0) V.nonnegative = false;
    return V;
}

double scaled_potential_value(const TransversePotential& V, const SurfaceQuadrature& q,
                              double eps, const Vec& x)
{
    if (!(eps > 0.0) || eps > V.beta + 1e-14)
        throw config_error("scaled_potential_value: eps must lie in (0, beta]");
    // nearest surface node gives the local frame
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (int j = 0; j < q.size(); ++j) {
        const double d = (x - q.nodes[j].x).squaredNorm();
        if (d < bd) {
            bd = d;
            best = j;
        }
    }
    const auto& n = q.nodes[best];
    const double t = (x - n.x).dot(n.normal);
    if (std::fabs(t) >= eps) return 0.0;
    return (V.beta / eps) * V.a(n.x) * V.q(t / eps);
}

ProductGrid make_product_grid(std::shared_ptr<const SurfaceQuadrature> surf,
                              int gauss_order)
{
    if (gauss_order < 2) throw config_error("make_product_grid: Gauss order >= 2");
    ProductGrid g;
    g.surf = std::move(surf);
    g.trans = gauss_legendre(gauss_order);
    return g;
}

PotentialData evaluate_potential(const TransversePotential& V, const ProductGrid& g)
{
    const int ns = g.surf->size(), T = g.T();
    PotentialData pd;
    pd.u = Vec::Zero(ns * T);
    pd.v = Vec::Zero(ns * T);
    pd.a = Vec::Zero(ns);
    pd.alpha = Vec::Zero(ns);
    double qsum = 0.0;
    for (int m = 0; m < T; ++m) qsum += g.trans.w[m] * V.q(g.trans.x[m]);
    for (int j = 0; j < ns; ++j) {
        pd.a(j) = V.a(g.surf->nodes[j].x);
        pd.alpha(j) = V.beta * pd.a(j) * qsum;
        for (int m = 0; m < T; ++m) {
            const double aq = pd.a(j) * V.q(g.trans.x[m]);
            const double u = std::sqrt(V.beta * std::fabs(aq));
            pd.u(g.index(j, m)) = u;
            pd.v(g.index(j, m)) = (aq < 0.0 ? -u : u);
        }
    }
    return pd;
}

VolumeGrid make_volume_grid(const SurfaceQuadrature& q, double kappa, int n_per_dim)
{
    if (!(kappa > 0.0)) throw config_error("make_volume_grid: kappa must be positive");
    if (n_per_dim < 4) throw config_error("make_volume_grid: n_per_dim >= 4");
    const int d = q.surface->d;
    const double beta = q.surface->beta;
    Vec lo = Vec::Constant(d, std::numeric_limits<double>::infinity());
    Vec hi = Vec::Constant(d, -std::numeric_limits<double>::infinity());
    for (const auto& n : q.nodes) {
        lo = lo.cwiseMin(n.x);
        hi = hi.cwiseMax(n.x);
    }
    const double pad = beta + 6.0 / kappa;
    lo.array() -= pad;
    hi.array() += pad;

    VolumeGrid vg;
    vg.box_lo = lo;
    vg.box_hi = hi;
    const double h = (hi - lo).maxCoeff() / n_per_dim;
    vg.spacing = h;
    const double cut2 = 0.25 * h * h; // drop points within h/2 of the surface

    std::vector<int> idx(d, 0), dims(d);
    for (int k = 0; k < d; ++k)
        dims[k] = std::max(1, static_cast<int>(std::lround((hi(k) - lo(k)) / h)));

    std::vector<double> wkeep;
    double cellw = 1.0;
    double boxvol = 1.0;
    for (int k = 0; k < d; ++k) {
        cellw *= (hi(k) - lo(k)) / dims[k];
        boxvol *= hi(k) - lo(k);
    }
    bool done = false;
    while (!done) {
        Vec p(d);
        for (int k = 0; k < d; ++k)
            p(k) = lo(k) + (idx[k] + 0.5) * (hi(k) - lo(k)) / dims[k];
        double dist2 = std::numeric_limits<double>::infinity();
        for (const auto& n : q.nodes) dist2 = std::min(dist2, (p - n.x).squaredNorm());
        if (dist2 > cut2) {
            vg.points.push_back(p);
            wkeep.push_back(cellw);
        }
        done = true;
        for (int k = 0; k < d; ++k) {
            if (++idx[k] < dims[k]) {
                done = false;
                break;
            }
            idx[k] = 0;
        }
    }
    if (vg.points.empty()) throw config_error("make_volume_grid: empty grid");
    vg.w = Vec::Zero(vg.size());
    double s = 0.0;
    for (double w : wkeep) s += w;
    const double scale = boxvol / s; // weights keep summing to the box volume
    for (int k = 0; k < vg.size(); ++k) vg.w(k) = wkeep[k] * scale;
    return vg;
}

} // namespace ds
