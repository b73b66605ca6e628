#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "deltashell/bessel.hpp"

namespace {

// Independent oracle: K_nu(z) = int_0^inf exp(-z cosh t) cosh(nu t) dt,
// composite Simpson with a small fixed step.  Slow but trustworthy.
double k_oracle(double nu, double z)
{
    const double tmax = std::acosh(760.0 / z < 1.0 ? 1.0 : 760.0 / z) + 1e-9;
    const int n = 40000; // even
    const double h = tmax / n;
    auto f = [&](double t) { return std::exp(-z * std::cosh(t)) * std::cosh(nu * t); };
    double s = f(0.0) + f(tmax);
    for (int i = 1; i < n; ++i) s += f(i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// I_n(z) = (1/pi) int_0^pi exp(z cos t) cos(n t) dt
double i_oracle(int nu, double z)
{
    const int n = 40000;
    const double h = M_PI / n;
    auto f = [&](double t) { return std::exp(z * std::cos(t)) * std::cos(nu * t); };
    double s = f(0.0) + f(M_PI);
    for (int i = 1; i < n; ++i) s += f(i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / (3.0 * M_PI);
}

} // namespace

TEST_CASE("K0/K1 match the integral-representation oracle across the regime switch")
{
    const std::vector<double> zs = {0.05, 0.1, 0.3, 0.7, 1.0, 1.5, 1.9, 2.0,
                                    2.1, 3.0, 5.0, 10.0, 30.0, 100.0, 600.0};
    for (double z : zs) {
        CHECK(ds::bessel_k0(z) == doctest::Approx(k_oracle(0.0, z)).epsilon(1e-12));
        CHECK(ds::bessel_k1(z) == doctest::Approx(k_oracle(1.0, z)).epsilon(1e-12));
    }
}

TEST_CASE("half-integer and recurrence orders match the oracle")
{
    for (double z : {0.2, 1.0, 2.5, 8.0}) {
        CHECK(ds::bessel_k(0.5, z) == doctest::Approx(k_oracle(0.5, z)).epsilon(1e-12));
        CHECK(ds::bessel_k(1.5, z) == doctest::Approx(k_oracle(1.5, z)).epsilon(1e-12));
        CHECK(ds::bessel_k(2.0, z) == doctest::Approx(k_oracle(2.0, z)).epsilon(1e-11));
        CHECK(ds::bessel_k(2.5, z) == doctest::Approx(k_oracle(2.5, z)).epsilon(1e-11));
        CHECK(ds::bessel_k(3.0, z) == doctest::Approx(k_oracle(3.0, z)).epsilon(1e-11));
    }
}

TEST_CASE("frozen reference values")
{
    CHECK(ds::bessel_k0(1.0) == doctest::Approx(0.42102443824070834).epsilon(1e-12));
    CHECK(ds::bessel_k1(1.0) == doctest::Approx(0.60190723019723458).epsilon(1e-12));
    // K_{1/2}(2) = sqrt(pi/4) e^{-2}
    CHECK(ds::bessel_k(0.5, 2.0) ==
          doctest::Approx(std::sqrt(0.25 * M_PI) * std::exp(-2.0)).epsilon(1e-14));
    CHECK(ds::bessel_k(0.5, 2.0) == doctest::Approx(0.1199377).epsilon(1e-6));
    // K_{3/2}(z) = sqrt(pi/2z) e^{-z} (1 + 1/z)
    for (double z : {0.5, 3.0}) {
        CHECK(ds::bessel_k(1.5, z) ==
              doctest::Approx(std::sqrt(0.5 * M_PI / z) * std::exp(-z) * (1.0 + 1.0 / z))
                  .epsilon(1e-14));
    }
}

TEST_CASE("small-argument limit z K1(z) -> 1")
{
    CHECK(1e-6 * ds::bessel_k1(1e-6) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("underflow policy: exact zero beyond z = 700")
{
    CHECK(ds::bessel_k0(701.0) == 0.0);
    CHECK(ds::bessel_k1(800.0) == 0.0);
    CHECK(ds::bessel_k(1.5, 1e4) == 0.0);
    CHECK(ds::bessel_k0(600.0) > 0.0);
}

TEST_CASE("domain errors for z <= 0")
{
    CHECK_THROWS_AS(ds::bessel_k0(0.0), std::domain_error);
    CHECK_THROWS_AS(ds::bessel_k1(-1.0), std::domain_error);
    CHECK_THROWS_AS(ds::bessel_k(0.5, 0.0), std::domain_error);
}

TEST_CASE("modified Bessel I against its oracle")
{
    for (double z : {0.1, 1.0, 5.0, 20.0}) {
        CHECK(ds::bessel_i0(z) == doctest::Approx(i_oracle(0, z)).epsilon(1e-12));
        CHECK(ds::bessel_i1(z) == doctest::Approx(i_oracle(1, z)).epsilon(1e-12));
        CHECK(ds::bessel_in(3, z) == doctest::Approx(i_oracle(3, z)).epsilon(1e-11));
    }
    CHECK(ds::bessel_i0(1.0) == doctest::Approx(1.2660658777520084).epsilon(1e-13));
    CHECK(ds::bessel_i1(1.0) == doctest::Approx(0.56515910399248503).epsilon(1e-13));
}

TEST_CASE("Wronskian identity I_0 K_1 + I_1 K_0 = 1/z")
{
    for (double z : {0.3, 1.0, 2.0, 6.0}) {
        const double w =
            ds::bessel_i0(z) * ds::bessel_k1(z) + ds::bessel_i1(z) * ds::bessel_k0(z);
        CHECK(w == doctest::Approx(1.0 / z).epsilon(1e-12));
    }
}
