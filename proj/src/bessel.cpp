#include "deltashell/bessel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ds {

namespace {

// Steed's continued fraction for K_0, K_1 at x >= 2 (Thompson-Barnett CF2,
// specialized to order 0).  Full double precision in this range.
void k0k1_cf(double x, double& rk0, double& rk1)
{
    const double eps = 1e-16;
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d, delh = d;
    double q1 = 0.0, q2 = 1.0;
    const double a1 = 0.25; // 1/4 - nu^2, nu = 0
    double q = a1, c = a1, a = -a1;
    double s = 1.0 + q * delh;
    for (int i = 2; i <= 20000; ++i) {
        a -= 2.0 * (i - 1);
        c = -a * c / i;
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::fabs(dels / s) < eps) break;
    }
    h = a1 * h;
    rk0 = std::sqrt(M_PI / (2.0 * x)) * std::exp(-x) / s;
    rk1 = rk0 * (x + 0.5 - h) / x;
}

void check_z(double z)
{
    if (!(z > 0.0))
        throw std::domain_error("bessel_k: argument must be > 0, got " + std::to_string(z));
}

// The continued fraction costs a few hundred ns, which dominates dense kernel
// fills.  Accelerate moderate arguments with Chebyshev fits (in 1/z) of
// sqrt(z) e^z K_nu(z), generated once from the continued fraction itself so
// no accuracy is given away.
struct KChebTable {
    static constexpr int NC = 40;
    // K0 on [2,10] and [10,48], K1 likewise
    double c[4][NC];
    double ulo[4], uhi[4];

    KChebTable()
    {
        fit(0, 0, 2.0, 10.0);
        fit(1, 0, 10.0, 48.0);
        fit(2, 1, 2.0, 10.0);
        fit(3, 1, 10.0, 48.0);
    }

    void fit(int slot, int order, double zlo, double zhi)
    {
        ulo[slot] = 1.0 / zhi;
        uhi[slot] = 1.0 / zlo;
        double f[NC];
        for (int k = 0; k < NC; ++k) {
            const double x = std::cos(M_PI * (k + 0.5) / NC);
            const double u = 0.5 * (ulo[slot] + uhi[slot]) +
                             0.5 * (uhi[slot] - ulo[slot]) * x;
            const double z = 1.0 / u;
            double k0, k1;
            k0k1_cf(z, k0, k1);
            f[k] = std::sqrt(z) * std::exp(z) * (order == 0 ? k0 : k1);
        }
        for (int j = 0; j < NC; ++j) {
            double s = 0.0;
            for (int k = 0; k < NC; ++k)
                s += f[k] * std::cos(M_PI * j * (k + 0.5) / NC);
            c[slot][j] = 2.0 / NC * s;
        }
    }

    double eval(int slot, double z) const
    {
        const double u = 1.0 / z;
        const double x =
            (2.0 * u - ulo[slot] - uhi[slot]) / (uhi[slot] - ulo[slot]);
        const double x2 = 2.0 * x;
        double b1 = 0.0, b2 = 0.0;
        for (int j = NC - 1; j >= 1; --j) {
            const double b0 = c[slot][j] + x2 * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        const double g = 0.5 * c[slot][0] + x * b1 - b2;
        return g * std::exp(-z) / std::sqrt(z);
    }
};

const KChebTable& kcheb()
{
    static const KChebTable t;
    return t;
}

} // namespace

double bessel_i0(double z)
{
    const double t = 0.25 * z * z;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 500; ++k) {
        term *= t / (static_cast<double>(k) * k);
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum;
}

double bessel_i1(double z)
{
    const double t = 0.25 * z * z;
    double term = 0.5 * z, sum = term;
    for (int k = 1; k < 500; ++k) {
        term *= t / (static_cast<double>(k) * (k + 1.0));
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum;
}

double bessel_in(int n, double z)
{
    if (n < 0) n = -n;
    if (n == 0) return bessel_i0(z);
    if (n == 1) return bessel_i1(z);
    // series: sum_k (z/2)^{n+2k} / (k! (n+k)!)
    double first = 1.0;
    for (int m = 1; m <= n; ++m) first *= 0.5 * z / m;
    const double t = 0.25 * z * z;
    double term = first, sum = first;
    for (int k = 1; k < 500; ++k) {
        term *= t / (static_cast<double>(k) * (n + k));
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum;
}

double bessel_k0(double z)
{
    check_z(z);
    if (z > 700.0) return 0.0;
    if (z > 2.0) {
        if (z <= 10.0) return kcheb().eval(0, z);
        if (z <= 48.0) return kcheb().eval(1, z);
        double k0, k1;
        k0k1_cf(z, k0, k1);
        return k0;
    }
    const double t = 0.25 * z * z;
    double term = 1.0, hk = 0.0, sum = 0.0;
    for (int k = 1; k < 60; ++k) {
        term *= t / (static_cast<double>(k) * k);
        hk += 1.0 / k;
        const double add = term * hk;
        sum += add;
        if (add < 1e-18 * (std::fabs(sum) + 1.0)) break;
    }
    return -(std::log(0.5 * z) + EULER_GAMMA) * bessel_i0(z) + sum;
}

double bessel_k1(double z)
{
    check_z(z);
    if (z > 700.0) return 0.0;
    if (z > 2.0) {
        if (z <= 10.0) return kcheb().eval(2, z);
        if (z <= 48.0) return kcheb().eval(3, z);
        double k0, k1;
        k0k1_cf(z, k0, k1);
        return k1;
    }
    // K_1 = 1/z + ln(z/2) I_1(z) - (z/4) sum_k (H_k + H_{k+1} - 2 gamma) t^k / (k! (k+1)!)
    const double t = 0.25 * z * z;
    double term = 1.0; // t^k / (k! (k+1)!)
    double hk = 0.0, hk1 = 1.0;
    double sum = term * (hk + hk1 - 2.0 * EULER_GAMMA);
    for (int k = 1; k < 60; ++k) {
        term *= t / (static_cast<double>(k) * (k + 1.0));
        hk += 1.0 / k;
        hk1 += 1.0 / (k + 1.0);
        const double add = term * (hk + hk1 - 2.0 * EULER_GAMMA);
        sum += add;
        if (std::fabs(add) < 1e-18 * (std::fabs(sum) + 1.0)) break;
    }
    return 1.0 / z + std::log(0.5 * z) * bessel_i1(z) - 0.25 * z * sum;
}

double bessel_k(double nu, double z)
{
    check_z(z);
    if (nu < 0.0) nu = -nu; // K_{-nu} = K_nu
    if (z > 700.0) return 0.0;

    const double twice = 2.0 * nu;
    const long itwice = std::lround(twice);
    if (std::fabs(twice - itwice) > 1e-12)
        throw std::invalid_argument("bessel_k: order must be integer or half-integer");

    if (itwice % 2 == 0) {
        const int n = static_cast<int>(itwice / 2);
        double km1 = bessel_k0(z), k = bessel_k1(z);
        if (n == 0) return km1;
        for (int m = 1; m < n; ++m) {
            const double knext = km1 + (2.0 * m / z) * k;
            km1 = k;
            k = knext;
        }
        return k;
    }
    // half-integer orders: K_{1/2} closed form, then upward recurrence
    const double k_half = std::sqrt(M_PI / (2.0 * z)) * std::exp(-z);
    if (itwice == 1) return k_half;
    double km1 = k_half, k = k_half * (1.0 + 1.0 / z); // K_{3/2}
    if (itwice == 3) return k;
    for (long m = 3; m < itwice; m += 2) {
        const double order = 0.5 * m; // current top order
        const double knext = km1 + (2.0 * order / z) * k;
        km1 = k;
        k = knext;
    }
    return k;
}

} // namespace ds
