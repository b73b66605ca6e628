#pragma once
#include <functional>
#include <vector>

#include "deltashell/geometry.hpp"

namespace ds {

// Kress quadrature weights R_k for the periodic logarithmic kernel
// ln(4 sin^2((t - tau)/2)) on N = 2n equispaced nodes; the weight coupling
// nodes i and j is R_{|i-j| mod N}.
std::vector<double> kress_log_weights(int N);

// Spectrally accurate single-layer matrix on a closed curve sampled at N
// equispaced parameter nodes (2 pi-periodic parametrization assumed; rescale
// speeds beforehand).  Row i approximates int G_kappa(|x_i - x(tau)|) f(tau)
// |x'(tau)| dtau from nodal values of f.
Mat kress_single_layer(const std::vector<Vec>& x, const std::vector<double>& speed,
                       double kappa);

// nodes/weights of the composite Gauss rule on [a, b] with panels
// geometrically graded toward tstar (integrable endpoint-type singularities
// allowed at tstar)
struct GradedRule {
    std::vector<double> x, w;
};
GradedRule graded_rule(double a, double b, double tstar, int order = 8,
                       int levels = 36);

// integral of f over [a, b] with the rule above
double graded_integrate(const std::function<double(double)>& f, double a, double b,
                        double tstar, int order = 8, int levels = 36);

// integral of f over the rectangle [ax,bx] x [ay,by] with a Duffy-type
// concentration of points at the (clamped) singular location (sx, sy);
// the rectangle is split at the singular point and each piece integrated
// with corner-Duffy maps that absorb a 1/r singularity
double duffy_rect_integrate(const std::function<double(double, double)>& f,
                            double ax, double bx, double ay, double by,
                            double sx, double sy, int order = 8);

} // namespace ds
