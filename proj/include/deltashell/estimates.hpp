#pragma once
#include <string>
#include <vector>

#include "deltashell/geometry.hpp"
#include "deltashell/green.hpp"

namespace ds {

// one sampled point of an estimate sweep; unused sweep parameters stay 0
struct EstimateRow {
    std::string id; // row family within the report (report id when empty)
    std::string shape;
    double lambda = 0.0;
    double eps = 0.0;
    double r0 = 0.0;
    double value = 0.0;    // measured supremum / integral
    double envelope = 0.0; // bound the estimate claims, constant stripped
    double ratio = 0.0;    // value / envelope (the measured constant)
    bool pass = true;
};

struct EstimateReport {
    std::string id;
    std::vector<EstimateRow> rows;
    double slope = 0.0; // log-log fit where a power law is claimed
    double ratio_min = 0.0, ratio_max = 0.0;
    bool pass = false;
};

struct EstimateThresholds {
    double slope_min = 0.9;
    double ratio_factor = 3.0; // max/min ratio drift across the sweep
    double exponent_tol = 0.1; // |fitted - claimed| power for measure laws
};

// sup_x int_Sigma |G_lambda(x - y)| dsigma(y) <= C(lambda), with
// C ~ (-lambda)^{-1/2}: the supremum is sampled on the surface nodes, on
// offset shells at distances {eps-scale, 1/kappa, 3/kappa} and at seeded far
// points; one row per lambda plus the 4*lambda halving companion
EstimateReport check_surface_kernel_sup(const SurfaceQuadrature& q,
                                        const std::vector<double>& lambdas,
                                        const EstimateThresholds& th = {});

// sup_x int_{Omega_eps} |G_lambda| <= M eps over the layer of half-width eps
EstimateReport check_layer_kernel_scaling(const SurfaceQuadrature& q, double lambda,
                                          const std::vector<double>& eps_list,
                                          const EstimateThresholds& th = {});

// sigma(Sigma cap B(x, r0)) <= C r0^{d-1} and vol(Omega_eps cap B) <= C eps
// r0^{d-1}; centers on Sigma, in the layer, and far away
EstimateReport check_ball_measure_bounds(const SurfaceQuadrature& q, double eps,
                                         const std::vector<double>& r0_list,
                                         const EstimateThresholds& th = {});

// whole-space shift difference int |G(x - y - eps s nu) - G(x - y)| dx <= C eps
// (translation invariant, evaluated as a two-pole integral at the worst shift
// s = 1) and the surface-integrated companion <= C eps (1 + |ln eps|)
EstimateReport check_shift_difference_bounds(const SurfaceQuadrature& q, double lambda,
                                             const std::vector<double>& eps_list,
                                             const EstimateThresholds& th = {});

// triple integral int_Sigma int_{-1}^{1} int_0^1 |grad G(x - y - eps theta s nu)|
// <= C (1 + |ln eps|), with x on Sigma (constant path) and on a far point
// (the eps-independent regime)
EstimateReport check_gradient_logbound(const SurfaceQuadrature& q, double lambda,
                                       const std::vector<double>& eps_list,
                                       const EstimateThresholds& th = {});

// sup over nodes and |s| <= 1 of |1 - det(1 - eps s W)| / eps; bounded by
// 2 (d-1) max|principal curvature| for eps below half the curvature radius
double weingarten_defect(const SurfaceQuadrature& q, double eps);

} // namespace ds
