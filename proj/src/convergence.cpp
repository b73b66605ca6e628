#include "deltashell/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "deltashell/linalg.hpp"

namespace ds {

namespace {

constexpr double ZERO_FLOOR = 1e-14;

void check_eps_list(const std::vector<double>& eps, double beta)
{
    if (eps.size() < 4)
        throw config_error("rate sweep needs at least 4 eps values");
    for (size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0) || eps[i] > beta + 1e-14)
            throw config_error("rate sweep: eps must lie in (0, beta]");
        if (i > 0 && !(eps[i] < eps[i - 1]))
            throw config_error("rate sweep: eps values must be strictly decreasing");
    }
}

void check_decreasing(const std::vector<double>& norms, const char* what)
{
    for (size_t i = 1; i < norms.size(); ++i) {
        if (norms[i] < ZERO_FLOOR) continue;
        if (norms[i] > 1.05 * norms[i - 1])
            throw numerical_error(
                std::string(what) +
                " difference norms stopped decreasing along the sweep; the "
                "discretization floor has been reached - refine the surface "
                "grid / transverse rule or drop the smallest eps values");
    }
}

} // namespace

double rate_envelope(const std::string& name, double eps)
{
    if (!(eps > 0.0)) throw config_error("rate_envelope: eps must be positive");
    const double lg = 1.0 + std::fabs(std::log(eps));
    if (name == "eps") return eps;
    if (name == "eps_sqrtlog") return eps * std::sqrt(lg);
    if (name == "eps_log") return eps * lg;
    throw config_error("rate_envelope: unknown envelope '" + name + "'");
}

RateFit fit_rate(const std::vector<double>& eps, const std::vector<double>& norms,
                 const std::string& envelope, const RateThresholds& th)
{
    if (eps.size() != norms.size())
        throw config_error("fit_rate: eps/norm length mismatch");
    if (eps.size() < 4) throw config_error("fit_rate: need >= 4 points");
    RateFit f;
    f.eps = eps;
    f.norms = norms;
    f.envelope = envelope;
    f.env.resize(eps.size());
    bool all_zero = true;
    for (size_t i = 0; i < eps.size(); ++i) {
        if (i > 0 && !(eps[i] < eps[i - 1]))
            throw config_error("fit_rate: eps must be strictly decreasing");
        if (norms[i] < 0.0) throw numerical_error("fit_rate: negative norm");
        f.env[i] = rate_envelope(envelope, eps[i]);
        if (norms[i] > ZERO_FLOOR) all_zero = false;
    }
    if (all_zero) {
        // identically vanishing difference (V = 0): the bounds hold vacuously
        f.slope = 0.0;
        f.ratio_min = f.ratio_max = 0.0;
        f.pass = true;
        return f;
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(eps.size());
    f.ratio_min = std::numeric_limits<double>::infinity();
    f.ratio_max = 0.0;
    for (size_t i = 0; i < eps.size(); ++i) {
        const double x = std::log(eps[i]);
        const double y = std::log(std::max(norms[i], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        const double r = norms[i] / f.env[i];
        f.ratio_min = std::min(f.ratio_min, r);
        f.ratio_max = std::max(f.ratio_max, r);
    }
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.pass = f.slope >= th.slope_min && f.slope <= th.slope_max &&
             f.ratio_max <= th.ratio_factor * f.ratio_min;
    return f;
}

ComponentRates component_rates(const SpectralParameter& sp, const ProductGrid& g,
                               const PotentialData& pd, const VolumeGrid& vol,
                               std::vector<double> eps_list,
                               const RateThresholds& th)
{
    std::sort(eps_list.rbegin(), eps_list.rend());
    check_eps_list(eps_list, g.surf->surface->beta);

    // one near-classification margin for the whole sweep keeps every A/C
    // assembly on the same quadrature layout as its eps = 0 partner
    const double margin = eps_list.front();

    const DiscreteOperator b0 = assemble_B0_matched(sp, g, pd, 0.0);
    const auto [a0, c0] = assemble_AC_eps(sp, 0.0, g, pd, vol, margin);

    std::vector<double> na, nb, nc;
    for (double e : eps_list) {
        const DiscreteOperator be = assemble_B_eps(sp, e, g, pd);
        nb.push_back(operator_norm({be.a - b0.a, be.w_out, be.w_in}));
        const auto [ae, ce] = assemble_AC_eps(sp, e, g, pd, vol, margin);
        na.push_back(operator_norm({ae.a - a0.a, ae.w_out, ae.w_in}));
        nc.push_back(operator_norm({ce.a - c0.a, ce.w_out, ce.w_in}));
    }
    check_decreasing(na, "A");
    check_decreasing(nb, "B");
    check_decreasing(nc, "C");

    ComponentRates out;
    out.a = fit_rate(eps_list, na, "eps_sqrtlog", th);
    out.b = fit_rate(eps_list, nb, "eps_log", th);
    out.c = fit_rate(eps_list, nc, "eps_sqrtlog", th);
    return out;
}

FullRateReport full_resolvent_rate(const SpectralParameter& sp, const ProductGrid& g,
                                   const PotentialData& pd, const VolumeGrid& vol,
                                   std::vector<double> eps_list,
                                   const RateThresholds& th)
{
    std::sort(eps_list.rbegin(), eps_list.rend());
    check_eps_list(eps_list, g.surf->surface->beta);
    const double margin = eps_list.front();
    const int n = g.size();

    const DiscreteOperator b0 = assemble_B0_matched(sp, g, pd, 0.0);
    if (operator_norm(b0) >= 1.0)
        throw numerical_error("full_resolvent_rate: ||B_0(lambda)|| >= 1; pick a "
                              "more negative lambda");
    const auto [a0, c0] = assemble_AC_eps(sp, 0.0, g, pd, vol, margin);
    LuFactor lu0;
    lu0.factor(Mat::Identity(n, n) - b0.a);
    const Mat corr0 = matmul(a0.a, lu0.solve(c0.a));

    FullRateReport rep;
    std::vector<double> svd;
    Mat last_corr;
    for (double e : eps_list) {
        const DiscreteOperator be = assemble_B_eps(sp, e, g, pd);
        const double bn = operator_norm(be);
        if (bn >= 1.0)
            throw numerical_error(
                "full_resolvent_rate: ||B_eps(lambda)|| >= 1 at eps = " +
                std::to_string(e) + "; pick a more negative lambda");
        rep.norm_b.push_back(bn);
        rep.inv_bound.push_back(1.0 / (1.0 - bn));
        LuFactor lu;
        lu.factor(Mat::Identity(n, n) - be.a);
        const auto [ae, ce] = assemble_AC_eps(sp, e, g, pd, vol, margin);
        const Mat corr = matmul(ae.a, lu.solve(ce.a));
        const DiscreteOperator diff{corr - corr0, vol.w, vol.w};
        const double nd = operator_norm(diff);
        const double sb = schur_bound(diff);
        if (sb < nd * (1.0 - 1e-10))
            throw numerical_error("full_resolvent_rate: Schur bound fell below "
                                  "the SVD norm - assembly inconsistency");
        svd.push_back(nd);
        rep.schur.push_back(sb);
        last_corr = corr;
    }
    check_decreasing(svd, "resolvent");

    // adding and removing the discretized free resolvent must not change the
    // difference (the free parts cancel algebraically)
    if (last_corr.size() > 0) {
        const DiscreteOperator r = free_resolvent(sp, vol);
        const Mat with = (r.a + last_corr) - (r.a + corr0);
        const Mat without = last_corr - corr0;
        rep.free_cancellation = (with - without).cwiseAbs().maxCoeff();
    }

    rep.fit = fit_rate(eps_list, svd, "eps_log", th);
    return rep;
}

} // namespace ds
