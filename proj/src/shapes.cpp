#include <algorithm>
#include <cmath>
#include <memory>

#include "deltashell/geometry.hpp"
#include "deltashell/quadrules.hpp"

namespace ds {

namespace {

Vec v1(double a)
{
    Vec v(1);
    v << a;
    return v;
}

Vec v2(double a, double b)
{
    Vec v(2);
    v << a, b;
    return v;
}

// Cumulative integral table for int_0^u f, evaluated with 8-point Gauss on
// fine panels; deterministic and accurate to ~1e-13 for the smooth f here.
class Cumulative {
public:
    Cumulative(std::function<double(double)> f, double lo, double hi, double step)
        : f_(std::move(f)), lo_(lo)
    {
        const int n = std::max(2, static_cast<int>(std::ceil((hi - lo) / step)));
        h_ = (hi - lo) / n;
        table_.resize(n + 1);
        table_[0] = 0.0; // accumulate from lo, shift so the value at 0 vanishes
        for (int i = 1; i <= n; ++i)
            table_[i] = table_[i - 1] + panel(lo_ + (i - 1) * h_, lo_ + i * h_);
        offset_ = raw(0.0);
    }

    double operator()(double u) const { return raw(u) - offset_; }

private:
    double raw(double u) const
    {
        const int n = static_cast<int>(table_.size()) - 1;
        int i = static_cast<int>(std::floor((u - lo_) / h_));
        i = std::clamp(i, 0, n - 1);
        return table_[i] + panel(lo_ + i * h_, u);
    }

    double panel(double a, double b) const
    {
        static const GaussRule g = gauss_legendre(8);
        double s = 0.0;
        for (int i = 0; i < 8; ++i)
            s += g.w[i] * f_(0.5 * (a + b) + 0.5 * (b - a) * g.x[i]);
        return 0.5 * (b - a) * s;
    }

    std::function<double(double)> f_;
    double lo_, h_;
    double offset_ = 0.0;
    std::vector<double> table_;
};

// curve given by its tangent angle psi(u), arc-length parametrized
Chart tangent_angle_chart(std::function<double(double)> psi,
                          std::function<double(double)> dpsi, double lo, double hi)
{
    auto cx = std::make_shared<Cumulative>(
        [psi](double t) { return std::cos(psi(t)); }, lo, hi, 0.01);
    auto cy = std::make_shared<Cumulative>(
        [psi](double t) { return std::sin(psi(t)); }, lo, hi, 0.01);
    Chart c;
    c.ambient_dim = 2;
    c.lo = v1(lo);
    c.hi = v1(hi);
    c.periodic = {false};
    c.phi = [cx, cy](const Vec& u) { return v2((*cx)(u(0)), (*cy)(u(0))); };
    c.dphi = [psi](const Vec& u) {
        Mat d(2, 1);
        d << std::cos(psi(u(0))), std::sin(psi(u(0)));
        return d;
    };
    c.d2phi = [psi, dpsi](const Vec& u) {
        const double p = psi(u(0)), dp = dpsi(u(0));
        return std::vector<Vec>{v2(-dp * std::sin(p), dp * std::cos(p))};
    };
    c.normal = [psi](const Vec& u) {
        const double p = psi(u(0));
        return v2(-std::sin(p), std::cos(p)); // left normal; curvature = psi'
    };
    return c;
}

} // namespace

// C^infty bump transition: 1 on (-inf, a], 0 on [b, inf)
double smooth_cut(double x, double a, double b)
{
    if (x <= a) return 1.0;
    if (x >= b) return 0.0;
    const double t = (x - a) / (b - a);
    const double fa = std::exp(-1.0 / t);
    const double fb = std::exp(-1.0 / (1.0 - t));
    return fb / (fa + fb);
}

Hypersurface make_circle(double R, double beta)
{
    if (!(R > 0.0) || !(beta > 0.0) || !(beta < R))
        throw config_error("circle: need 0 < beta < R");
    Chart c;
    c.ambient_dim = 2;
    c.lo = v1(0.0);
    c.hi = v1(2.0 * M_PI);
    c.periodic = {true};
    c.phi = [R](const Vec& u) { return v2(R * std::cos(u(0)), R * std::sin(u(0))); };
    c.dphi = [R](const Vec& u) {
        Mat d(2, 1);
        d << -R * std::sin(u(0)), R * std::cos(u(0));
        return d;
    };
    c.d2phi = [R](const Vec& u) {
        return std::vector<Vec>{v2(-R * std::cos(u(0)), -R * std::sin(u(0)))};
    };
    c.normal = [](const Vec& u) { return v2(-std::cos(u(0)), -std::sin(u(0))); };

    Hypersurface h;
    h.d = 2;
    h.charts = {c};
    h.closed = true;
    h.name = "circle";
    h.beta = beta;
    h.eta = std::min(0.95, beta / R + 0.05);
    h.c_bilip = 0.05;
    return h;
}

Hypersurface make_sphere(double R, double beta)
{
    if (!(R > 0.0) || !(beta > 0.0) || !(beta < R))
        throw config_error("sphere: need 0 < beta < R");

    // two stereographic square charts (projection from the opposite pole).
    // The uniform parameter grid then has isotropic, non-degenerate cells
    // everywhere, and the blend weight depends only on the height z, so the
    // two charts sum to one exactly.  Blend band |z| < zc * R.
    const double zc = 0.4;
    const double half = 1.05 * std::sqrt((1.0 + zc) / (1.0 - zc));

    auto cap = [&](double zsign) {
        Chart c;
        c.ambient_dim = 3;
        c.lo = v2(-half, -half);
        c.hi = v2(half, half);
        c.periodic = {false, false};
        c.phi = [R, zsign](const Vec& v) {
            const double s = v.squaredNorm(), D = 1.0 + s;
            Vec x(3);
            x << 2.0 * R * v(0) / D, 2.0 * R * v(1) / D, zsign * R * (1.0 - s) / D;
            return x;
        };
        c.dphi = [R, zsign](const Vec& v) {
            const double u = v(0), w = v(1);
            const double s = u * u + w * w, D = 1.0 + s, D2 = D * D;
            Mat d(3, 2);
            d << 2.0 * R * (D - 2.0 * u * u) / D2, -4.0 * R * u * w / D2,
                -4.0 * R * u * w / D2, 2.0 * R * (D - 2.0 * w * w) / D2,
                -zsign * 4.0 * R * u / D2, -zsign * 4.0 * R * w / D2;
            return d;
        };
        c.d2phi = [R, zsign](const Vec& v) {
            const double u = v(0), w = v(1);
            const double s = u * u + w * w, D = 1.0 + s, D3 = D * D * D;
            Vec duu(3), duw(3), dww(3);
            duu << 4.0 * R * u * (4.0 * u * u - 3.0 * D) / D3,
                -4.0 * R * w * (D - 4.0 * u * u) / D3,
                -zsign * 4.0 * R * (D - 4.0 * u * u) / D3;
            duw << 4.0 * R * w * (4.0 * u * u - D) / D3,
                4.0 * R * u * (4.0 * w * w - D) / D3,
                zsign * 16.0 * R * u * w / D3;
            dww << -4.0 * R * u * (D - 4.0 * w * w) / D3,
                4.0 * R * w * (4.0 * w * w - 3.0 * D) / D3,
                -zsign * 4.0 * R * (D - 4.0 * w * w) / D3;
            return std::vector<Vec>{duu, duw, duw, dww};
        };
        c.normal = [R, zsign](const Vec& v) {
            const double s = v.squaredNorm(), D = 1.0 + s;
            Vec n(3); // inward: principal curvatures +1/R
            n << -2.0 * v(0) / D, -2.0 * v(1) / D, -zsign * (1.0 - s) / D;
            return n;
        };
        c.pou = [zc](const Vec& v) {
            // distance from this chart's own pole, measured as a height:
            // (s - 1)/(s + 1) is -z/R on the north chart and +z/R on the
            // south one, so the two blend weights sum to one exactly
            const double s = v.squaredNorm();
            return smooth_cut((s - 1.0) / (s + 1.0), -zc, zc);
        };
        return c;
    };

    Hypersurface h;
    h.d = 3;
    h.charts = {cap(1.0), cap(-1.0)};
    h.closed = true;
    h.name = "sphere";
    h.beta = beta;
    h.eta = std::min(0.95, 2.0 * beta / R + 0.05);
    h.c_bilip = 0.05;
    return h;
}

Hypersurface make_segment(double half_length, double beta)
{
    if (!(half_length > 0.0) || !(beta > 0.0))
        throw config_error("segment: need positive half_length and beta");
    Chart c;
    c.ambient_dim = 2;
    c.lo = v1(-half_length);
    c.hi = v1(half_length);
    c.periodic = {false};
    c.phi = [](const Vec& u) { return v2(u(0), 0.0); };
    c.dphi = [](const Vec&) {
        Mat d(2, 1);
        d << 1.0, 0.0;
        return d;
    };
    c.d2phi = [](const Vec&) { return std::vector<Vec>{v2(0.0, 0.0)}; };
    c.normal = [](const Vec&) { return v2(0.0, 1.0); };

    Hypersurface h;
    h.d = 2;
    h.charts = {c};
    h.closed = false;
    h.name = "segment";
    h.beta = beta;
    h.eta = 0.05;
    h.c_bilip = 0.5;
    return h;
}

Hypersurface make_broken_line(double theta, double delta_s, double half_length, double beta)
{
    if (!(theta > 0.0) || !(theta < M_PI / 2.0))
        throw config_error("broken_line: need theta in (0, pi/2)");
    if (!(delta_s > 0.0) || !(half_length > delta_s))
        throw config_error("broken_line: need 0 < delta_s < half_length");
    const double amp = M_PI / 2.0 - theta;
    auto psi = [amp, delta_s](double u) { return amp * std::tanh(u / delta_s); };
    auto dpsi = [amp, delta_s](double u) {
        const double c = std::cosh(u / delta_s);
        return amp / (delta_s * c * c);
    };
    Hypersurface h;
    h.d = 2;
    h.charts = {tangent_angle_chart(psi, dpsi, -half_length, half_length)};
    h.closed = false;
    h.name = "broken_line";
    h.beta = beta;
    const double kmax = amp / delta_s;
    h.eta = std::min(0.95, beta * kmax + 0.05);
    h.c_bilip = 0.05;
    if (beta * kmax >= 1.0)
        throw config_error("broken_line: beta * max curvature >= 1; reduce beta or sharpen less");
    return h;
}

Hypersurface make_wavy_curve(double amplitude, double period, double half_length, double beta)
{
    if (!(amplitude > 0.0) || !(period > 0.0) || !(half_length > 0.0))
        throw config_error("wavy_curve: need positive amplitude, period, half_length");
    const double om = 2.0 * M_PI / period;
    auto psi = [amplitude, om](double s) { return -(amplitude / om) * std::cos(om * s); };
    auto dpsi = [amplitude, om](double s) { return amplitude * std::sin(om * s); };
    Hypersurface h;
    h.d = 2;
    h.charts = {tangent_angle_chart(psi, dpsi, -half_length, half_length)};
    h.closed = false;
    h.name = "wavy_curve";
    h.beta = beta;
    h.eta = std::min(0.95, beta * amplitude + 0.05);
    h.c_bilip = 0.05;
    if (beta * amplitude >= 1.0)
        throw config_error("wavy_curve: beta * amplitude >= 1 violates the tube hypothesis");
    return h;
}

Hypersurface make_fresnel_curve(double umax, double beta)
{
    if (!(umax > 0.0) || !(beta > 0.0))
        throw config_error("fresnel_curve: need positive umax and beta");
    auto cy = std::make_shared<Cumulative>(
        [](double t) { return std::sin(t * t); }, -umax, umax, 0.002);
    Chart c;
    c.ambient_dim = 2;
    c.lo = v1(-umax);
    c.hi = v1(umax);
    c.periodic = {false};
    c.phi = [cy](const Vec& u) { return v2(u(0), (*cy)(u(0))); };
    c.dphi = [](const Vec& u) {
        Mat d(2, 1);
        d << 1.0, std::sin(u(0) * u(0));
        return d;
    };
    c.d2phi = [](const Vec& u) {
        return std::vector<Vec>{v2(0.0, 2.0 * u(0) * std::cos(u(0) * u(0)))};
    };
    c.normal = [](const Vec& u) {
        const double s = std::sin(u(0) * u(0));
        const double n = std::sqrt(1.0 + s * s);
        return v2(-s / n, 1.0 / n); // left normal: L(u) = 2u cos(u^2)/(1+sin^2 u^2)^{3/2}
    };

    Hypersurface h;
    h.d = 2;
    h.charts = {c};
    h.closed = false;
    h.name = "fresnel_curve";
    h.beta = beta;
    h.eta = 0.9;
    h.c_bilip = 0.01;
    return h;
}

Hypersurface make_shape(const std::string& kind, const std::vector<double>& p, double beta)
{
    auto need = [&](size_t n) {
        if (p.size() < n)
            throw config_error("shape '" + kind + "' needs " + std::to_string(n) +
                               " parameter(s)");
    };
    if (kind == "circle") {
        need(1);
        return make_circle(p[0], beta);
    }
    if (kind == "sphere") {
        need(1);
        return make_sphere(p[0], beta);
    }
    if (kind == "segment") {
        need(1);
        return make_segment(p[0], beta);
    }
    if (kind == "broken_line") {
        need(3);
        return make_broken_line(p[0], p[1], p[2], beta);
    }
    if (kind == "wavy_curve") {
        need(3);
        return make_wavy_curve(p[0], p[1], p[2], beta);
    }
    if (kind == "fresnel_curve") {
        need(1);
        return make_fresnel_curve(p[0], beta);
    }
    throw config_error("unknown shape kind '" + kind + "'");
}

} // namespace ds
