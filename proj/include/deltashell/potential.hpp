#pragma once
#include <functional>
#include <memory>
#include <string>

#include "deltashell/geometry.hpp"
#include "deltashell/quadrules.hpp"

namespace ds {

// Separable tube potential V(x_S + t nu) = a(x_S) q(t/beta), supported on |t| < beta.
struct TransversePotential {
    std::string profile;
    double beta = 0.3;
    std::function<double(double)> q;     // transverse profile on (-1, 1), zero outside
    std::function<double(const Vec&)> a; // slowly varying surface modulation

    bool nonnegative = true; // true for the built-in box/gaussian profiles
};

// built-ins: "box" (q = 1/2), "gaussian" (exp(-8 t^2)), "two_bump" (signed,
// asymmetric), "zero"
TransversePotential make_potential(const std::string& profile, double beta,
                                   double amplitude = 1.0);

// squeezed potential V_eps evaluated at an ambient point: (beta/eps) a q(t/eps)
// with t the signed normal distance read off the nearest surface node
double scaled_potential_value(const TransversePotential& V, const SurfaceQuadrature& q,
                              double eps, const Vec& x);

// surface rule x transverse Gauss rule on (-1,1); flat index (j, m) -> j*T + m
struct ProductGrid {
    std::shared_ptr<const SurfaceQuadrature> surf;
    GaussRule trans;

    int T() const { return trans.order(); }
    int size() const { return surf->size() * T(); }
    int index(int j, int m) const { return j * T() + m; }
};

ProductGrid make_product_grid(std::shared_ptr<const SurfaceQuadrature> surf,
                              int gauss_order = 16);

// potential factors sampled on a product grid: u*v = beta a q nodewise, and the
// transversal average alpha_j = beta a_j sum_m w_m q(t_m) taken with the same rule
struct PotentialData {
    Vec u, v;    // product-grid vectors
    Vec a;       // surface-node modulation values
    Vec alpha;   // surface-node coupling strength
};

PotentialData evaluate_potential(const TransversePotential& V, const ProductGrid& g);

// uniform tensor grid on the bounding box of the beta-tube padded by 6/kappa;
// points within spacing/2 of the surface are dropped, weights renormalized so
// they still sum to the box volume
struct VolumeGrid {
    std::vector<Vec> points;
    Vec w;
    Vec box_lo, box_hi;
    double spacing = 0.0;

    int size() const { return static_cast<int>(points.size()); }
};

VolumeGrid make_volume_grid(const SurfaceQuadrature& q, double kappa, int n_per_dim);

} // namespace ds
