#pragma once
#include <vector>

#include "deltashell/operators.hpp"

namespace ds {

// Birman-Schwinger eigenvalue search.  An energy lambda below the essential
// threshold is an eigenvalue of the interaction operator exactly when the
// symmetrized coupling-times-resolvent operator has eigenvalue 1, so the
// counting function N(lambda) = #{mu_k(lambda) >= 1} jumps there; every jump
// is located by bisection and the jump size is the multiplicity.
struct SpectralReport {
    std::vector<double> eigenvalues;   // ascending, strictly below threshold
    std::vector<int> multiplicity;     // branch count crossing 1 at each
    std::vector<double> residuals;     // |mu_closest - 1| at each eigenvalue
    double threshold = 0.0;            // 0 compact, -alpha^2/4 line-like
    bool truncation_warning = false;   // eigenfunction mass near window edge
    double edge_mass = 0.0;            // worst edge mass fraction observed
};

// delta interaction of strength alpha >= 0 (nodewise) on the given surface.
// Search window [lam_lo, lam_hi] with lam_hi strictly below the threshold;
// bisection to |dlambda| <= 1e-9.
SpectralReport delta_eigenvalues(const SurfaceQuadrature& q, const Vec& alpha,
                                 double lam_lo, double lam_hi, int n_scan = 24);

// squeezed operator with transverse profile V >= 0 at width eps; same
// crossing search on the eigenvalues of B_eps(lambda)
SpectralReport heps_eigenvalues(const ProductGrid& g, const TransversePotential& V,
                                const PotentialData& pd, double eps,
                                double lam_lo, double lam_hi, int n_scan = 24);

// mollified corner (two arms under angle 2*theta) with constant coupling:
// bound state below the line threshold -alpha^2/4 for both the delta
// operator and its squeezed approximant
struct BrokenLineDemo {
    SpectralReport delta;
    SpectralReport heps;
    double threshold = 0.0;
};
BrokenLineDemo broken_line_bound_state_demo(double theta, double alpha,
                                            double half_length, double delta_s,
                                            int N = 128, double eps_frac = 0.1,
                                            int gauss_order = 8);

// ---- scalar oracles ------------------------------------------------------
// closed-form single-layer eigenvalues and the Birman-Schwinger roots they
// induce; used to pin the matrix solver against independent formulas

// sphere radius R: mu_l(kappa) = kappa R^2 i_l(kappa R) k_l(kappa R)
// (modified spherical Bessel pair); l = 0 reduces to (1 - e^{-2 kappa R})/(2 kappa)
double sphere_layer_eigenvalue(int l, double R, double kappa);
// circle radius R, constant density: mu_0(kappa) = R I_0(kappa R) K_0(kappa R)
double circle_layer_eigenvalue(double R, double kappa);

// kappa* solving alpha * mu_0(kappa) = 1 (bisection to 1e-12); the induced
// eigenvalue is -kappa*^2.  Throws numerical_error when no root exists.
double sphere_bs_root(double alpha, double R);
double circle_bs_root(double alpha, double R);

} // namespace ds
