#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "deltashell/bessel.hpp"
#include "deltashell/estimates.hpp"
#include "deltashell/geometry.hpp"

using namespace ds;

namespace {

const double beta = 0.3;
const std::vector<double> eps_sweep = {0.2 * beta, 0.1 * beta, 0.05 * beta,
                                       0.025 * beta};

const EstimateRow& find_row(const EstimateReport& r, const std::string& id,
                            double eps)
{
    for (const EstimateRow& w : r.rows)
        if (w.id == id && std::fabs(w.eps - eps) < 1e-12) return w;
    REQUIRE(false);
    return r.rows.front();
}

} // namespace

TEST_CASE("whole-space shift integral has a closed form in any dimension")
{
    // |G(z - delta e) - G(z)| integrates to 2 kappa^{-2} (1 - exp(-kappa delta/2)):
    // the transverse marginal of G is the 1-D resolvent kernel e^{-kappa|t|}/(2 kappa),
    // and the absolute difference splits across the bisector plane
    auto q2 = build_quadrature(make_circle(1.0, beta), 64);
    auto r2 = check_shift_difference_bounds(q2, -1.0, eps_sweep);
    for (double eps : eps_sweep) {
        const double exact = 2.0 * (1.0 - std::exp(-0.5 * eps));
        CHECK(find_row(r2, "shift_whole_space", eps).value ==
              doctest::Approx(exact).epsilon(1e-4));
    }

    auto q3 = build_quadrature(make_sphere(1.0, beta), 8);
    auto r3 = check_shift_difference_bounds(q3, -4.0, {0.06, 0.03, 0.015, 0.0075});
    for (double eps : {0.06, 0.03}) {
        const double exact = 2.0 / 4.0 * (1.0 - std::exp(-eps));
        CHECK(find_row(r3, "shift_whole_space", eps).value ==
              doctest::Approx(exact).epsilon(1e-4));
    }
}

TEST_CASE("circle: surface kernel supremum follows the (-lambda)^{-1/2} law")
{
    auto q = build_quadrature(make_circle(1.0, beta), 256);
    auto rep = check_surface_kernel_sup(q, {-1.0, -4.0});
    CHECK(rep.pass);
    // sup_x int_Sigma G_{-1} = I0(1) K0(1) on the unit circle, attained on Sigma
    const double exact = bessel_i0(1.0) * bessel_k0(1.0);
    double c1 = 0.0;
    for (const EstimateRow& r : rep.rows)
        if (r.lambda == -1.0) c1 = r.value;
    CHECK(c1 == doctest::Approx(exact).epsilon(1e-3));
    CHECK(rep.slope == doctest::Approx(-0.5).epsilon(0.12));
    // halving companions sit in the proof's window
    double c4 = 0.0;
    for (const EstimateRow& r : rep.rows)
        if (r.lambda == -4.0) c4 = r.value;
    CHECK(c4 / c1 > 0.4);
    CHECK(c4 / c1 < 0.75);
}

TEST_CASE("circle: layer integral scales linearly in the layer width")
{
    auto q = build_quadrature(make_circle(1.0, beta), 256);
    auto rep = check_layer_kernel_scaling(q, -4.0, eps_sweep);
    CHECK(rep.pass);
    CHECK(rep.slope >= 0.9);
    CHECK(rep.ratio_max < 1.5 * rep.ratio_min);
    for (const EstimateRow& r : rep.rows) CHECK(r.value > 0.0);
}

TEST_CASE("circle: ball intersection measures")
{
    auto q = build_quadrature(make_circle(1.0, beta), 256);
    auto rep = check_ball_measure_bounds(q, 0.06, {0.05, 0.1, 0.2, 0.4});
    CHECK(rep.pass);
    CHECK(std::fabs(rep.slope - 1.0) <= 0.1);
    // flat local limit: arc within B(x, r0) centered on the curve is ~ 2 r0
    const EstimateRow* rs = nullptr;
    for (const EstimateRow& r : rep.rows)
        if (r.id == "ball_surface" && std::fabs(r.r0 - 0.1) < 1e-12) rs = &r;
    REQUIRE(rs != nullptr);
    const double arc = 4.0 * std::asin(0.05); // exact chord-to-arc value
    CHECK(rs->value == doctest::Approx(arc).epsilon(0.02));
}

TEST_CASE("circle: surface shift difference obeys the eps log envelope")
{
    auto q = build_quadrature(make_circle(1.0, beta), 256);
    auto rep = check_shift_difference_bounds(q, -1.0, eps_sweep);
    CHECK(rep.pass);
    CHECK(rep.slope >= 0.9);
    CHECK(rep.ratio_max <= 3.0 * rep.ratio_min);
}

TEST_CASE("circle: gradient triple integral grows like 1 + |ln eps|")
{
    auto q = build_quadrature(make_circle(1.0, beta), 256);
    auto rep = check_gradient_logbound(q, -1.0, eps_sweep);
    CHECK(rep.pass);
    double prev = 0.0;
    for (double eps : eps_sweep) {
        const double v = find_row(rep, "gradient_onsurface", eps).value;
        if (prev > 0.0) {
            const double inc = v - prev; // one halving step of eps
            CHECK(inc > 0.2 * std::log(2.0));
            CHECK(inc < 1.5 * std::log(2.0));
        }
        prev = v;
        // far observation point never sees the layer width
        CHECK(find_row(rep, "gradient_far", eps).ratio ==
              doctest::Approx(1.0).epsilon(0.01));
    }
}

TEST_CASE("sphere battery at reduced resolution")
{
    auto q = build_quadrature(make_sphere(1.0, beta), 12);
    auto sup = check_surface_kernel_sup(q, {-1.0});
    CHECK(sup.pass);
    // sup = kappa R^2 i0(kappa R) k0(kappa R) = (1 - e^{-2})/2 on the unit sphere
    CHECK(sup.rows.front().value ==
          doctest::Approx(0.5 * (1.0 - std::exp(-2.0))).epsilon(2e-3));

    CHECK(check_layer_kernel_scaling(q, -4.0, eps_sweep).pass);

    auto ball = check_ball_measure_bounds(q, 0.06, {0.2, 0.3, 0.45, 0.675});
    CHECK(ball.pass);
    CHECK(std::fabs(ball.slope - 2.0) <= 0.1);

    CHECK(check_shift_difference_bounds(q, -1.0, eps_sweep).pass);
    CHECK(check_gradient_logbound(q, -1.0, eps_sweep).pass);
}

TEST_CASE("ratio columns are stable under quadrature refinement")
{
    auto qc = build_quadrature(make_circle(1.0, beta), 128);
    auto qf = build_quadrature(make_circle(1.0, beta), 256);
    auto rc = check_layer_kernel_scaling(qc, -4.0, eps_sweep);
    auto rf = check_layer_kernel_scaling(qf, -4.0, eps_sweep);
    for (size_t i = 0; i < rc.rows.size(); ++i) {
        const double drift = rc.rows[i].ratio / rf.rows[i].ratio;
        CHECK(drift > 0.5);
        CHECK(drift < 2.0);
    }
    auto gc = check_gradient_logbound(qc, -1.0, eps_sweep);
    auto gf = check_gradient_logbound(qf, -1.0, eps_sweep);
    CHECK(gc.ratio_max / gf.ratio_max > 0.5);
    CHECK(gc.ratio_max / gf.ratio_max < 2.0);
}

TEST_CASE("thresholds are honored, not hard-coded")
{
    auto q = build_quadrature(make_circle(1.0, beta), 128);
    EstimateThresholds strict;
    strict.ratio_factor = 1.0001; // nothing real is this flat
    CHECK_FALSE(check_shift_difference_bounds(q, -1.0, eps_sweep, strict).pass);
    EstimateThresholds steep;
    steep.slope_min = 1.5; // linear laws cannot reach this
    CHECK_FALSE(check_layer_kernel_scaling(q, -4.0, eps_sweep, steep).pass);
}

TEST_CASE("tube Jacobian defect per unit width")
{
    auto qc = build_quadrature(make_circle(1.0, beta), 64);
    // circle: |1 - (1 - eps s / R)| / eps = |s| / R, supremum exactly 1
    CHECK(weingarten_defect(qc, 0.06) == doctest::Approx(1.0).epsilon(1e-12));

    auto qs = build_quadrature(make_sphere(1.0, beta), 8);
    const double ds3 = weingarten_defect(qs, 0.06);
    CHECK(ds3 > 1.9);
    CHECK(ds3 <= 2.0 * 2.0 * 1.0); // 2 (d-1) max principal curvature
}
