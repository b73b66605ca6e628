#include "deltashell/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "deltashell/bessel.hpp"
#include "deltashell/linalg.hpp"

namespace ds {

namespace {

constexpr double BISECT_TOL = 1e-9;

// symmetrized Birman-Schwinger matrix: W^{1/2} K W^{-1/2} with K the nodal
// matrix; symmetric up to roundoff because the kernel is, so average the
// transpose away before LAPACK
Mat symmetrize(const Mat& k, const Vec& w)
{
    const int n = static_cast<int>(w.size());
    Mat s = k;
    for (int j = 0; j < n; ++j) {
        const double cj = 1.0 / std::sqrt(w(j));
        for (int i = 0; i < n; ++i) s(i, j) *= std::sqrt(w(i)) * cj;
    }
    s = 0.5 * (s + s.transpose()).eval();
    return s;
}

using BsEval = std::function<void(double lam, Vec& vals)>;

int count_ge_one(const Vec& vals)
{
    int c = 0;
    for (int i = 0; i < vals.size(); ++i)
        if (vals(i) >= 1.0) ++c;
    return c;
}

double residual_at(const Vec& vals)
{
    double r = std::numeric_limits<double>::infinity();
    for (int i = 0; i < vals.size(); ++i) r = std::min(r, std::fabs(vals(i) - 1.0));
    return r;
}

struct Crossing {
    double lam;
    int mult;
    double residual;
};

void localize(const BsEval& eval, double lo, double hi, int nlo, int nhi,
              std::vector<Crossing>& out)
{
    if (nhi == nlo) return;
    if (hi - lo <= BISECT_TOL) {
        Vec vals;
        const double mid = 0.5 * (lo + hi);
        eval(mid, vals);
        out.push_back({mid, nhi - nlo, residual_at(vals)});
        return;
    }
    const double mid = 0.5 * (lo + hi);
    Vec vals;
    eval(mid, vals);
    const int nm = count_ge_one(vals);
    localize(eval, lo, mid, nlo, nm, out);
    localize(eval, mid, hi, nm, nhi, out);
}

// scan the window, assert the sampled monotonicity of the top branch, and
// bisect every jump of the counting function
SpectralReport crossing_search(const BsEval& eval, double lam_lo, double lam_hi,
                               double threshold, int n_scan)
{
    if (n_scan < 4) throw config_error("spectral scan needs n_scan >= 4");
    if (!(lam_lo < lam_hi))
        throw config_error("spectral scan: need lam_lo < lam_hi");
    if (!(lam_hi < threshold))
        throw config_error("spectral scan: window upper end must lie strictly "
                           "below the essential threshold");

    std::vector<double> grid(n_scan + 1);
    std::vector<int> counts(n_scan + 1);
    double prev_top = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n_scan; ++i) {
        grid[i] = lam_lo + (lam_hi - lam_lo) * i / n_scan;
        Vec vals;
        eval(grid[i], vals);
        counts[i] = count_ge_one(vals);
        const double top = vals.size() ? vals(vals.size() - 1) : 0.0;
        if (top < prev_top - 1e-8 * (1.0 + std::fabs(top)))
            throw numerical_error("spectral scan: top Birman-Schwinger branch "
                                  "not increasing along the window");
        prev_top = top;
    }

    std::vector<Crossing> cr;
    for (int i = 0; i < n_scan; ++i)
        localize(eval, grid[i], grid[i + 1], counts[i], counts[i + 1], cr);
    std::sort(cr.begin(), cr.end(),
              [](const Crossing& a, const Crossing& b) { return a.lam < b.lam; });

    SpectralReport rep;
    rep.threshold = threshold;
    for (const auto& c : cr) {
        rep.eigenvalues.push_back(c.lam);
        rep.multiplicity.push_back(c.mult);
        rep.residuals.push_back(c.residual);
    }
    return rep;
}

// threshold of the comparison operator: 0 for a closed surface, -alpha^2/4
// for a (truncated) line-like shape with constant coupling
double bs_threshold(bool closed, const Vec& alpha)
{
    if (closed) return 0.0;
    const double a0 = alpha.size() ? alpha(0) : 0.0;
    for (int i = 0; i < alpha.size(); ++i)
        if (std::fabs(alpha(i) - a0) > 1e-10 * (1.0 + std::fabs(a0)))
            throw config_error("line-like threshold needs constant coupling");
    return -0.25 * a0 * a0;
}

// modified spherical Bessel pair (i_0 = sinh x / x, k_0 = e^{-x} / x) by
// upward recurrence; fine for the small orders used here
void spherical_ik(int l, double x, double& il, double& kl)
{
    double i0 = std::sinh(x) / x;
    double i1 = (x * std::cosh(x) - std::sinh(x)) / (x * x);
    double k0 = std::exp(-x) / x;
    double k1 = k0 * (1.0 + 1.0 / x);
    if (l == 0) { il = i0; kl = k0; return; }
    for (int m = 1; m < l; ++m) {
        const double inext = i0 - (2.0 * m + 1.0) / x * i1;
        const double knext = k0 + (2.0 * m + 1.0) / x * k1;
        i0 = i1; i1 = inext;
        k0 = k1; k1 = knext;
    }
    il = i1;
    kl = k1;
}

double bs_scalar_root(const std::function<double(double)>& mu, double alpha)
{
    if (!(alpha > 0.0)) throw config_error("bs root: need alpha > 0");
    auto f = [&](double k) { return alpha * mu(k) - 1.0; };
    double lo = 1e-8;
    if (f(lo) <= 0.0)
        throw numerical_error("bs root: no Birman-Schwinger root (coupling "
                              "below the critical strength)");
    double hi = 1.0;
    while (f(hi) > 0.0) {
        hi *= 2.0;
        if (hi > 1e6) throw numerical_error("bs root: bracketing failed");
    }
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

SpectralReport delta_eigenvalues(const SurfaceQuadrature& q, const Vec& alpha,
                                 double lam_lo, double lam_hi, int n_scan)
{
    if (alpha.size() != q.size())
        throw config_error("delta_eigenvalues: alpha size mismatch");
    for (int i = 0; i < alpha.size(); ++i)
        if (alpha(i) < 0.0)
            throw config_error("delta_eigenvalues: needs alpha >= 0 nodewise");

    Vec w(q.size());
    for (int i = 0; i < q.size(); ++i) w(i) = q.nodes[i].w;
    const Vec sa = alpha.cwiseSqrt();

    BsEval eval = [&](double lam, Vec& vals) {
        const SpectralParameter sp(lam);
        const DiscreteOperator m = assemble_M(sp, q);
        Mat k = m.a;
        k.array().colwise() *= sa.array();
        k.array().rowwise() *= sa.transpose().array();
        sym_eigen(symmetrize(k, w), vals);
    };
    return crossing_search(eval, lam_lo, lam_hi,
                           bs_threshold(q.surface->closed, alpha), n_scan);
}

SpectralReport heps_eigenvalues(const ProductGrid& g, const TransversePotential& V,
                                const PotentialData& pd, double eps,
                                double lam_lo, double lam_hi, int n_scan)
{
    if (!V.nonnegative)
        throw config_error("heps_eigenvalues: needs V >= 0 (symmetric "
                           "Birman-Schwinger operator)");
    if (pd.u.maxCoeff() == 0.0) {
        // V = 0: the free operator has no discrete spectrum
        SpectralReport rep;
        rep.threshold = bs_threshold(g.surf->surface->closed, pd.alpha);
        if (!(lam_hi < rep.threshold))
            throw config_error("spectral scan: window upper end must lie "
                               "strictly below the essential threshold");
        return rep;
    }

    Vec w(g.size());
    for (int j = 0; j < g.surf->size(); ++j)
        for (int m = 0; m < g.T(); ++m)
            w(g.index(j, m)) = g.surf->nodes[j].w * g.trans.w[m];

    BsEval eval = [&](double lam, Vec& vals) {
        const SpectralParameter sp(lam);
        const DiscreteOperator b = assemble_B_eps(sp, eps, g, pd);
        sym_eigen(symmetrize(b.a, w), vals);
    };
    return crossing_search(eval, lam_lo, lam_hi,
                           bs_threshold(g.surf->surface->closed, pd.alpha), n_scan);
}

BrokenLineDemo broken_line_bound_state_demo(double theta, double alpha,
                                            double half_length, double delta_s,
                                            int N, double eps_frac, int gauss_order)
{
    const double kmax = (M_PI / 2.0 - theta) / delta_s;
    const double beta = std::min(0.3, 0.5 / kmax);
    auto shape = std::make_shared<Hypersurface>(
        make_broken_line(theta, delta_s, half_length, beta));
    auto quad = std::make_shared<SurfaceQuadrature>(build_quadrature(*shape, N));

    BrokenLineDemo demo;
    demo.threshold = -0.25 * alpha * alpha;
    const double lam_lo = -1.5 * alpha * alpha;
    const double lam_hi = demo.threshold - 1e-6 * alpha * alpha;

    const Vec av = Vec::Constant(quad->size(), alpha);
    demo.delta = delta_eigenvalues(*quad, av, lam_lo, lam_hi);

    // truncation diagnostic: weighted mass of the ground-state density in the
    // outer 5% of each arm
    if (!demo.delta.eigenvalues.empty()) {
        Vec w(quad->size());
        for (int i = 0; i < quad->size(); ++i) w(i) = quad->nodes[i].w;
        const SpectralParameter sp(demo.delta.eigenvalues.front());
        const DiscreteOperator m = assemble_M(sp, *quad);
        Mat k = alpha * m.a;
        Vec vals;
        Mat vecs;
        sym_eigen(symmetrize(k, w), vals, vecs);
        int best = 0;
        for (int i = 1; i < vals.size(); ++i)
            if (std::fabs(vals(i) - 1.0) < std::fabs(vals(best) - 1.0)) best = i;
        const double edge = 0.95 * half_length;
        double total = 0.0, outer = 0.0;
        for (int i = 0; i < quad->size(); ++i) {
            const double m2 = vecs(i, best) * vecs(i, best);
            total += m2;
            if (std::fabs(quad->nodes[i].u(0)) > edge) outer += m2;
        }
        demo.delta.edge_mass = outer / total;
        demo.delta.truncation_warning = demo.delta.edge_mass > 0.01;
    }

    const TransversePotential V = make_potential("box", beta, alpha / beta);
    const ProductGrid g = make_product_grid(quad, gauss_order);
    const PotentialData pd = evaluate_potential(V, g);
    demo.heps = heps_eigenvalues(g, V, pd, eps_frac * beta, lam_lo, lam_hi);
    demo.heps.truncation_warning = demo.delta.truncation_warning;
    demo.heps.edge_mass = demo.delta.edge_mass;
    return demo;
}

double sphere_layer_eigenvalue(int l, double R, double kappa)
{
    if (l < 0 || !(R > 0.0) || !(kappa > 0.0))
        throw config_error("sphere_layer_eigenvalue: bad arguments");
    double il, kl;
    spherical_ik(l, kappa * R, il, kl);
    return kappa * R * R * il * kl;
}

double circle_layer_eigenvalue(double R, double kappa)
{
    if (!(R > 0.0) || !(kappa > 0.0))
        throw config_error("circle_layer_eigenvalue: bad arguments");
    return R * bessel_i0(kappa * R) * bessel_k0(kappa * R);
}

double sphere_bs_root(double alpha, double R)
{
    return bs_scalar_root([R](double k) { return sphere_layer_eigenvalue(0, R, k); },
                          alpha);
}

double circle_bs_root(double alpha, double R)
{
    return bs_scalar_root([R](double k) { return circle_layer_eigenvalue(R, k); },
                          alpha);
}

} // namespace ds
