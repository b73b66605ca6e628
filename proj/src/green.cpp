#include "deltashell/green.hpp"

#include <algorithm>
#include <cmath>

#include "deltashell/bessel.hpp"

namespace ds {

namespace {

double norm_d(int d, const double* x)
{
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += x[i] * x[i];
    return std::sqrt(s);
}

void check_r(double r)
{
    if (!(r > 0.0))
        throw numerical_error("green: kernel evaluated at the singularity r = 0");
}

} // namespace

double green_radial(int d, const SpectralParameter& sp, double r)
{
    check_r(r);
    const double z = sp.kappa * r;
    if (z > 700.0) return 0.0;
    switch (d) {
    case 2:
        return bessel_k0(z) / (2.0 * M_PI);
    case 3:
        return std::exp(-z) / (4.0 * M_PI * r);
    default: {
        if (d < 2) throw config_error("green: dimension must be >= 2");
        const double nu = 0.5 * d - 1.0;
        return std::pow(2.0 * M_PI, -0.5 * d) * std::pow(r / sp.kappa, 1.0 - 0.5 * d) *
               bessel_k(nu, z);
    }
    }
}

double green(int d, const SpectralParameter& sp, const double* x)
{
    return green_radial(d, sp, norm_d(d, x));
}

double green_radial_derivative(int d, const SpectralParameter& sp, double r)
{
    check_r(r);
    const double z = sp.kappa * r;
    if (z > 700.0) return 0.0;
    switch (d) {
    case 2:
        return -sp.kappa * bessel_k1(z) / (2.0 * M_PI);
    case 3:
        return -std::exp(-z) * (1.0 + z) / (4.0 * M_PI * r * r);
    default: {
        if (d < 2) throw config_error("green: dimension must be >= 2");
        return -std::pow(2.0 * M_PI, -0.5 * d) * sp.kappa *
               std::pow(r / sp.kappa, 1.0 - 0.5 * d) * bessel_k(0.5 * d, z);
    }
    }
}

void green_gradient(int d, const SpectralParameter& sp, const double* x, double* grad)
{
    const double r = norm_d(d, x);
    const double gp = green_radial_derivative(d, sp, r);
    for (int i = 0; i < d; ++i) grad[i] = gp * x[i] / r;
}

EnvelopeReport envelope_check(int d, const SpectralParameter& sp,
                              const std::vector<double>& radii)
{
    EnvelopeReport rep{0.0, 0.0, 0.0, true};
    const double near_cut = 0.5 / sp.kappa;
    for (double r : radii) {
        const double g = green_radial(d, sp, r);
        const double gp = std::fabs(green_radial_derivative(d, sp, r));
        if (r <= near_cut) {
            const double env = (d == 2) ? 1.0 + std::fabs(std::log(sp.kappa * r))
                                        : std::pow(r, 2.0 - d);
            rep.c_near = std::max(rep.c_near, std::fabs(g) / env);
            rep.c_grad = std::max(rep.c_grad, gp * std::pow(r, d - 1.0));
        } else {
            rep.c_far = std::max(rep.c_far, std::fabs(g) * std::exp(sp.kappa * r));
        }
    }
    rep.pass = std::isfinite(rep.c_near) && std::isfinite(rep.c_far) &&
               std::isfinite(rep.c_grad);
    return rep;
}

} // namespace ds
