#include "deltashell/singular.hpp"

#include <algorithm>
#include <cmath>

#include "deltashell/bessel.hpp"
#include "deltashell/quadrules.hpp"

namespace ds {

std::vector<double> kress_log_weights(int N)
{
    if (N < 2 || N % 2 != 0)
        throw config_error("kress_log_weights: N must be even and >= 2");
    const int n = N / 2;
    std::vector<double> R(N);
    for (int k = 0; k < N; ++k) {
        const double t = k * M_PI / n;
        double s = 0.0;
        for (int m = 1; m < n; ++m) s += std::cos(m * t) / m;
        R[k] = -(2.0 * M_PI / n) * s - (M_PI / (n * n)) * std::cos(n * t);
    }
    return R;
}

Mat kress_single_layer(const std::vector<Vec>& x, const std::vector<double>& speed,
                       double kappa)
{
    const int N = static_cast<int>(x.size());
    if (N < 2 || N % 2 != 0)
        throw config_error("kress_single_layer: need an even number of nodes");
    const std::vector<double> R = kress_log_weights(N);
    const double h = 2.0 * M_PI / N;
    Mat S(N, N);
    for (int i = 0; i < N; ++i) {
        const double ti = i * h;
        for (int j = 0; j < N; ++j) {
            if (i == j) {
                // diagonal of the smooth remainder after the log split
                const double m2 = speed[i] *
                                  (-std::log(0.5 * kappa * speed[i]) - EULER_GAMMA) /
                                  (2.0 * M_PI);
                S(i, i) = R[0] * (-speed[i] / (4.0 * M_PI)) + h * m2;
                continue;
            }
            const double r = (x[i] - x[j]).norm();
            const double tj = j * h;
            const double lg = std::log(4.0 * std::pow(std::sin(0.5 * (ti - tj)), 2));
            const double kern = bessel_k0(kappa * r) / (2.0 * M_PI) * speed[j];
            const double m1 = -bessel_i0(kappa * r) / (4.0 * M_PI) * speed[j];
            const double m2 = kern - m1 * lg;
            S(i, j) = R[std::abs(i - j)] * m1 + h * m2;
        }
    }
    return S;
}

GradedRule graded_rule(double a, double b, double tstar, int order, int levels)
{
    GradedRule out;
    if (!(b > a)) return out;
    static thread_local int cached_order = -1;
    static thread_local GaussRule rule;
    if (order != cached_order) {
        rule = gauss_legendre(order);
        cached_order = order;
    }
    auto panel = [&](double p, double q) {
        const double c = 0.5 * (p + q), r = 0.5 * (q - p);
        for (int i = 0; i < rule.order(); ++i) {
            out.x.push_back(c + r * rule.x[i]);
            out.w.push_back(rule.w[i] * r);
        }
    };
    auto side = [&](double from, double sing) {
        // geometric panels shrinking toward sing; from may be left or right of it
        if (std::fabs(sing - from) < 1e-300) return;
        double outer = from;
        for (int l = 0; l < levels; ++l) {
            const bool last = (l == levels - 1);
            const double frac = last ? 0.0 : std::pow(0.5, l + 1);
            const double inner = sing + (from - sing) * frac;
            if (sing > from)
                panel(outer, inner);
            else
                panel(inner, outer);
            outer = inner;
            if (std::fabs(inner - sing) < 1e-14 * (1.0 + std::fabs(sing))) break;
        }
    };

    out.x.reserve(2 * levels * order);
    out.w.reserve(2 * levels * order);
    if (tstar <= a) {
        side(b, a);
    } else if (tstar >= b) {
        side(a, b);
    } else {
        side(a, tstar);
        side(b, tstar);
    }
    return out;
}

double graded_integrate(const std::function<double(double)>& f, double a, double b,
                        double tstar, int order, int levels)
{
    const GradedRule r = graded_rule(a, b, tstar, order, levels);
    double s = 0.0;
    for (size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * f(r.x[i]);
    return s;
}

double duffy_rect_integrate(const std::function<double(double, double)>& f,
                            double ax, double bx, double ay, double by,
                            double sx, double sy, int order)
{
    static thread_local int cached_order = -1;
    static thread_local GaussRule rule;
    if (order != cached_order) {
        rule = gauss_legendre_on(order, 0.0, 1.0);
        cached_order = order;
    }
    sx = std::clamp(sx, ax, bx);
    sy = std::clamp(sy, ay, by);

    // one rectangle with the singular point at corner (cx, cy), extents (ex, ey)
    auto corner = [&](double cx, double cy, double ex, double ey) {
        if (std::fabs(ex) < 1e-300 || std::fabs(ey) < 1e-300) return 0.0;
        double total = 0.0;
        // two Duffy maps cover the two triangles of the unit square
        for (int tri = 0; tri < 2; ++tri) {
            for (int i = 0; i < rule.order(); ++i) {
                const double s = rule.x[i];
                for (int j = 0; j < rule.order(); ++j) {
                    const double t = rule.x[j];
                    const double px = tri == 0 ? s : s * t;
                    const double py = tri == 0 ? s * t : s;
                    total += rule.w[i] * rule.w[j] * s * f(cx + ex * px, cy + ey * py);
                }
            }
        }
        return total * std::fabs(ex * ey);
    };

    return corner(sx, sy, bx - sx, by - sy) + corner(sx, sy, ax - sx, by - sy) +
           corner(sx, sy, bx - sx, ay - sy) + corner(sx, sy, ax - sx, ay - sy);
}

} // namespace ds
