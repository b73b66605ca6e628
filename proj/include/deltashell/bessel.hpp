#pragma once

namespace ds {

inline constexpr double EULER_GAMMA = 0.57721566490153286061;

// Modified Bessel functions needed by the Green's kernel G_lambda in
// dimensions d >= 2 (order (d-2)/2) and its radial derivative (order d/2).
//
// Accuracy target: 1e-12 relative.  Small arguments (z <= 2) use the
// defining power series, larger arguments the Steed continued fraction.
// Half-integer orders use the closed forms; higher orders use the upward
// recurrence K_{nu+1} = K_{nu-1} + (2 nu / z) K_nu.
//
// Underflow policy: for z > 700 every K_nu here returns exactly 0
// (exp(-700) ~ 1e-304; summed kernels gain nothing from denormals).

double bessel_k0(double z);
double bessel_k1(double z);

// nu must be n or n + 1/2 with integer n >= 0; z > 0 required.
double bessel_k(double nu, double z);

// First kind, used by oracles and the circle single-layer diagonalization.
double bessel_i0(double z);
double bessel_i1(double z);
double bessel_in(int n, double z);

} // namespace ds
