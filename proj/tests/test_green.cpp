#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "deltashell/bessel.hpp"
#include "deltashell/errors.hpp"
#include "deltashell/green.hpp"

using ds::SpectralParameter;

TEST_CASE("closed-form values in d = 2, 3")
{
    SpectralParameter sp(-1.0);
    double x3[3] = {1.0, 0.0, 0.0};
    CHECK(ds::green(3, sp, x3) == doctest::Approx(std::exp(-1.0) / (4.0 * M_PI)).epsilon(1e-14));
    CHECK(ds::green(3, sp, x3) == doctest::Approx(0.0292714).epsilon(1e-5));
    double x2[2] = {0.6, 0.8};
    CHECK(ds::green(2, sp, x2) ==
          doctest::Approx(ds::bessel_k0(1.0) / (2.0 * M_PI)).epsilon(1e-14));
    CHECK(ds::green(2, sp, x2) == doctest::Approx(0.0670058).epsilon(1e-5));
    // general-d path agrees with the specializations
    CHECK(ds::green_radial(2, sp, 0.7) ==
          doctest::Approx(std::pow(2 * M_PI, -1.0) * ds::bessel_k(0.0, 0.7)).epsilon(1e-13));
    CHECK(ds::green_radial(4, sp, 0.7) > 0.0);
}

TEST_CASE("gradient: closed form, finite differences, oddness")
{
    SpectralParameter sp(-1.0);
    double x[3] = {1.0, 0.0, 0.0}, g[3];
    ds::green_gradient(3, sp, x, g);
    CHECK(g[0] == doctest::Approx(-2.0 * std::exp(-1.0) / (4.0 * M_PI)).epsilon(1e-13));
    CHECK(g[0] == doctest::Approx(-0.0585428).epsilon(1e-5));
    CHECK(g[1] == 0.0);

    for (int d : {2, 3}) {
        SpectralParameter s2(-2.3);
        const double r = 0.7, h = 1e-6;
        const double fd =
            (ds::green_radial(d, s2, r + h) - ds::green_radial(d, s2, r - h)) / (2 * h);
        CHECK(ds::green_radial_derivative(d, s2, r) == doctest::Approx(fd).epsilon(1e-6));
    }

    double xm[3] = {-0.3, 0.4, -0.2}, xp[3] = {0.3, -0.4, 0.2}, gm[3], gp[3];
    ds::green_gradient(3, sp, xm, gm);
    ds::green_gradient(3, sp, xp, gp);
    for (int i = 0; i < 3; ++i) CHECK(gm[i] == doctest::Approx(-gp[i]).epsilon(1e-14));
}

TEST_CASE("singularity and parameter guards")
{
    SpectralParameter sp(-1.0);
    CHECK_THROWS_AS(ds::green_radial(2, sp, 0.0), ds::numerical_error);
    CHECK_THROWS_AS(SpectralParameter(0.0), ds::config_error);
    CHECK_THROWS_AS(SpectralParameter(1.0), ds::config_error);
}

TEST_CASE("monotonicity in lambda at fixed x")
{
    double prev = 0.0;
    bool first = true;
    for (double lam : {-9.0, -4.0, -1.0, -0.25}) {
        const double v = ds::green_radial(2, SpectralParameter(lam), 0.8);
        if (!first) CHECK(v > prev);
        prev = v;
        first = false;
    }
}

TEST_CASE("total mass: integral of G_lambda over R^d equals 1/(-lambda)")
{
    // radial quadrature: int_0^inf G(r) |S^{d-1}| r^{d-1} dr, log-spaced panels
    for (int d : {2, 3}) {
        for (double lam : {-1.0, -4.0}) {
            SpectralParameter sp(lam);
            const double area = (d == 2) ? 2.0 * M_PI : 4.0 * M_PI;
            // composite Gauss-Legendre on geometric panels [a,2a]
            static const double gx[8] = {-0.9602898564975363, -0.7966664774136267,
                                         -0.5255324099163290, -0.1834346424956498,
                                         0.1834346424956498,  0.5255324099163290,
                                         0.7966664774136267,  0.9602898564975363};
            static const double gw[8] = {0.1012285362903763, 0.2223810344533745,
                                         0.3137066458778873, 0.3626837833783620,
                                         0.3626837833783620, 0.3137066458778873,
                                         0.2223810344533745, 0.1012285362903763};
            double total = 0.0;
            double a = 1e-10 / sp.kappa;
            while (a * sp.kappa < 800.0) {
                const double b = 2.0 * a;
                for (int i = 0; i < 8; ++i) {
                    const double r = 0.5 * (a + b) + 0.5 * (b - a) * gx[i];
                    total += 0.5 * (b - a) * gw[i] * ds::green_radial(d, sp, r) * area *
                             std::pow(r, d - 1);
                }
                a = b;
            }
            CHECK(total == doctest::Approx(1.0 / (-lam)).epsilon(1e-6));
        }
    }
}

TEST_CASE("envelope check near zero and in the far field")
{
    std::vector<double> radii;
    for (double r = 1e-8; r < 1e-2; r *= 2.0) radii.push_back(r);
    for (double r = 1.0; r < 20.0; r *= 1.3) radii.push_back(r);

    SpectralParameter sp(-1.0);
    auto r2 = ds::envelope_check(2, sp, radii);
    CHECK(r2.pass);
    CHECK(r2.c_near < 1.0);  // K0(z)/(2pi) <= (1+|ln z|)/(2pi) * const near 0
    CHECK(r2.c_far < 1.0);
    CHECK(r2.c_grad < 1.0);  // |G'| r -> 1/(2 pi)

    auto r3 = ds::envelope_check(3, sp, radii);
    CHECK(r3.pass);
    // Newtonian limit: 4 pi r G -> 1
    CHECK(4.0 * M_PI * 1e-8 * ds::green_radial(3, sp, 1e-8) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r3.c_near == doctest::Approx(1.0 / (4.0 * M_PI)).epsilon(1e-3));
    CHECK(r3.c_grad == doctest::Approx(1.0 / (4.0 * M_PI)).epsilon(1e-3));
}
