#pragma once
#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "deltashell/errors.hpp"

namespace ds {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// One parametrization patch phi : U subset R^{d-1} -> R^d.  Derivatives are
// analytic for the built-in shapes; ad-hoc charts may leave them empty and
// get central finite differences with step fd_step.
struct Chart {
    int ambient_dim = 2;
    Vec lo, hi;                 // parameter box
    std::vector<bool> periodic; // per parameter coordinate

    std::function<Vec(const Vec&)> phi;
    std::function<Mat(const Vec&)> dphi;                // d x (d-1), optional
    std::function<std::vector<Vec>(const Vec&)> d2phi;  // (d-1)^2 entries (j,k), optional
    std::function<Vec(const Vec&)> normal;              // unit normal, optional
    std::function<double(const Vec&)> pou;              // chi weight, optional (default 1)

    double fd_step = 0.0; // 0 -> (domain width) * 1e-5

    int param_dim() const { return ambient_dim - 1; }
    bool contains(const Vec& u) const;
};

// Chart differential geometry.  All throw geometry_error / config_error on
// violated preconditions.
Mat chart_dphi(const Chart& c, const Vec& u);
std::vector<Vec> chart_d2phi(const Chart& c, const Vec& u);
Mat metric_tensor(const Chart& c, const Vec& u);
Vec chart_normal(const Chart& c, const Vec& u, int orientation);

// Shape operator L solving Dphi . L = -d(nu o phi); returned in the chart
// basis together with principal curvatures (eigenvalues, ascending).  The
// sign flips with the orientation of the normal field.
Mat weingarten(const Chart& c, const Vec& u, int orientation, Vec* curvatures = nullptr);

struct Hypersurface {
    int d = 2;
    std::vector<Chart> charts;
    int orientation = +1; // multiplies every chart normal
    bool closed = false;  // closed curve/surface (periodic quadrature applies for d=2)
    std::string name;

    // standing-hypothesis constants declared for this shape
    double beta = 0.3;  // tube half-width
    double eta = 0.5;   // det(1 - t W) must stay inside (1-eta, 1+eta)
    double c_bilip = 0.1;

    Vec normal_at(int chart, const Vec& u) const;
};

struct QuadNode {
    Vec x;       // ambient position
    double w;    // quadrature weight (chi * surface measure * rule weight)
    Vec normal;  // unit normal (surface orientation applied)
    Mat L;       // Weingarten matrix in the chart basis
    Vec curv;    // principal curvatures, ascending
    int chart;
    Vec u;                // parameter point
    Vec cell_lo, cell_hi; // parameter cell owned by this node
    double speed;         // sqrt(det G)
};

struct SurfaceQuadrature {
    std::shared_ptr<const Hypersurface> surface;
    std::vector<QuadNode> nodes;

    // set for closed d=2 curves discretized by the periodic rule:
    bool closed_curve = false;
    double period = 0.0; // parameter period of chart 0

    int size() const { return static_cast<int>(nodes.size()); }
    double total_weight() const;

    // det(1 - t W) at node j; throws geometry_error when the value leaves
    // (1 - eta, 1 + eta)
    double tube_jacobian(int j, double t) const;
    double tube_jacobian_raw(int j, double t) const;
};

// N >= 8 nodes per chart direction.  Closed curves get the periodic
// composite (trapezoid) rule; open curves the uniform midpoint rule; the
// sphere a Gauss(theta) x periodic(phi) rule on each polar-cap chart.
SurfaceQuadrature build_quadrature(const Hypersurface& h, int N);

struct HypothesisReport {
    bool injective = true;
    bool det_ok = true;     // hypothesis (b)
    bool bilipschitz_ok = true;
    double eta_est = 0.0;   // max |det(1 - tW) - 1| over the sample
    double c_est = 0.0;     // min displacement ratio (hypothesis (c))
    double lipschitz_est = 0.0;
    bool pass() const { return injective && det_ok && bilipschitz_ok; }
};

HypothesisReport hypothesis_check(const Hypersurface& h, double beta, int density);

// C^infty transition: 1 on (-inf, a], 0 on [b, inf); mirrored pairs sum to 1
double smooth_cut(double x, double a, double b);

// ---- built-in shapes ----------------------------------------------------
// Closed shapes keep the normal pointing to the side that makes the
// principal curvatures +1/R (the tube Jacobian is then 1 - t/R).
Hypersurface make_circle(double R, double beta);
Hypersurface make_sphere(double R, double beta);
Hypersurface make_segment(double half_length, double beta);
// two straight arms enclosing angle 2*theta, corner mollified over width delta_s
Hypersurface make_broken_line(double theta, double delta_s, double half_length, double beta);
// periodic curvature profile kappa(s) = amplitude * sin(2 pi s / period), truncated
Hypersurface make_wavy_curve(double amplitude, double period, double half_length, double beta);
// the C^2 curve (u, int_0^u sin(t^2) dt) whose Weingarten map is unbounded
Hypersurface make_fresnel_curve(double umax, double beta);

Hypersurface make_shape(const std::string& kind, const std::vector<double>& params,
                        double beta);

} // namespace ds
