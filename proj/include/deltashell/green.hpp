#pragma once
#include <cmath>
#include <vector>

#include "deltashell/errors.hpp"

namespace ds {

// Spectral parameter lambda < 0 with decay rate kappa = sqrt(-lambda).
struct SpectralParameter {
    double lambda;
    double kappa;

    explicit SpectralParameter(double lam)
        : lambda(lam), kappa(0.0)
    {
        if (!(lam < 0.0))
            throw config_error("spectral parameter must satisfy lambda < 0");
        kappa = std::sqrt(-lam);
    }
};

// Free-resolvent kernel
//   G_lambda(x) = (2 pi)^{-d/2} (|x| / kappa)^{1 - d/2} K_{d/2-1}(kappa |x|)
// specialized: d=2: K_0(kappa r)/(2 pi), d=3: exp(-kappa r)/(4 pi r).
// green_radial takes r = |x| directly; gradient is radial, d in {2,3}.

double green_radial(int d, const SpectralParameter& sp, double r);
double green(int d, const SpectralParameter& sp, const double* x);

// dG/dr = -(2 pi)^{-d/2} kappa (r/kappa)^{1-d/2} K_{d/2}(kappa r)  (< 0)
double green_radial_derivative(int d, const SpectralParameter& sp, double r);
void green_gradient(int d, const SpectralParameter& sp, const double* x, double* grad);

// Appendix-style envelope check for G_lambda and its gradient:
//  - near 0:   |G| <= c (1 + |ln(kappa r)|)   (d = 2)
//              |G| <= c r^{2-d}               (d >= 3)
//  - far:      |G| <= c exp(-kappa r)
//  - gradient: |dG/dr| <= c r^{1-d} near 0.
struct EnvelopeReport {
    double c_near;     // sup of |G| / near-envelope over the small radii
    double c_far;      // sup of |G| / exp(-kappa r) over the large radii
    double c_grad;     // sup of |G'| * r^{d-1} over the small radii
    bool pass;         // all three finite and stable across the sample
};

EnvelopeReport envelope_check(int d, const SpectralParameter& sp,
                              const std::vector<double>& radii);

} // namespace ds
