#pragma once
#include <utility>
#include <vector>

#include "deltashell/geometry.hpp"
#include "deltashell/green.hpp"
#include "deltashell/potential.hpp"

namespace ds {

// Dense matrix together with the L2 quadrature weights of its domain and
// codomain grids; all norms below are between the weighted spaces.
struct DiscreteOperator {
    Mat a;
    Vec w_out, w_in;
};

// norm of W_out^{1/2} A W_in^{-1/2}: dense SVD up to 4000 rows+cols, power
// iteration beyond
double operator_norm(const DiscreteOperator& d);

// Schur-test upper bound from weighted row/column sums of |kernel|; always
// >= operator_norm up to roundoff
double schur_bound(const DiscreteOperator& d);

// single-layer boundary operator M(lambda) on the surface grid
DiscreteOperator assemble_M(const SpectralParameter& sp, const SurfaceQuadrature& q);

// Averaged kernel between external points and the delta-shifted surface
// Y = x_S + delta nu: entry [k, j] approximates the mean of G over the
// parameter cell of node j (weighted by the shifted surface measure), so the
// single-layer matrix column is entry * det_j(delta) * w_j.  Far entries are
// plain kernel evaluations; near entries are re-integrated.
// near_margin widens the (shift-independent) near classification so that
// operators assembled at different delta share the same quadrature layout and
// their differences discretize the difference kernel; negative = |delta|
Mat averaged_kernel(const SpectralParameter& sp, const SurfaceQuadrature& q,
                    double delta, const std::vector<Vec>& pts,
                    double near_margin = -1.0);

DiscreteOperator assemble_gamma(const SpectralParameter& sp, const SurfaceQuadrature& q,
                                const VolumeGrid& vol);
DiscreteOperator assemble_gamma_star(const SpectralParameter& sp,
                                     const SurfaceQuadrature& q, const VolumeGrid& vol);

// Birman-Schwinger block B_eps = u R(lambda) v on the product grid (eps = 0
// collapses onto the surface operator M).  Near classification is by
// unshifted surface distance, so the quadrature layout is already identical
// across eps; near_margin (negative = 0) widens it further if desired.
DiscreteOperator assemble_B_eps(const SpectralParameter& sp, double eps,
                                const ProductGrid& g, const PotentialData& pd,
                                double near_margin = -1.0);
// B_0 with the same quadrature layout as the eps > 0 operators, for matched
// differences (assemble_B_eps(0) instead reproduces U M V exactly)
DiscreteOperator assemble_B0_matched(const SpectralParameter& sp, const ProductGrid& g,
                                     const PotentialData& pd, double near_margin);

DiscreteOperator assemble_A_eps(const SpectralParameter& sp, double eps,
                                const ProductGrid& g, const PotentialData& pd,
                                const VolumeGrid& vol);
DiscreteOperator assemble_C_eps(const SpectralParameter& sp, double eps,
                                const ProductGrid& g, const PotentialData& pd,
                                const VolumeGrid& vol);
// A and C share their shifted kernels; assembling them together halves the work
std::pair<DiscreteOperator, DiscreteOperator> assemble_AC_eps(
    const SpectralParameter& sp, double eps, const ProductGrid& g,
    const PotentialData& pd, const VolumeGrid& vol, double near_margin = -1.0);

// free resolvent R(lambda) discretized on the volume grid (self-cell corrected)
DiscreteOperator free_resolvent(const SpectralParameter& sp, const VolumeGrid& vol);

// gamma (1 - alpha M)^{-1} alpha gamma* as a volume-grid matrix
Mat krein_correction(const SpectralParameter& sp, const SurfaceQuadrature& q,
                     const Vec& alpha, const VolumeGrid& vol);
Vec krein_resolvent_apply(const SpectralParameter& sp, const SurfaceQuadrature& q,
                          const Vec& alpha, const VolumeGrid& vol, const Vec& f);

// A_eps (1 - B_eps)^{-1} C_eps as a volume-grid matrix
Mat heps_correction(const SpectralParameter& sp, double eps, const ProductGrid& g,
                    const PotentialData& pd, const VolumeGrid& vol);
Vec heps_resolvent_apply(const SpectralParameter& sp, double eps, const ProductGrid& g,
                         const PotentialData& pd, const VolumeGrid& vol, const Vec& f);

// most negative lambda with ||B_eps(lambda)|| <= 0.5 across the eps sweep,
// located by doubling + bisection
double find_lambda_M(const ProductGrid& g, const PotentialData& pd,
                     const std::vector<double>& eps_list, double lambda_start = -4.0);

} // namespace ds
