#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <memory>

#include "deltashell/operators.hpp"
#include "deltashell/parallel.hpp"

// assembly benchmark: serial reference path (threads = 1) against the
// OpenMP row-parallel path, checking the results stay bit-identical

using namespace ds;

namespace {

double tick()
{
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

} // namespace

int main(int argc, char** argv)
{
    const std::string kind = argc > 1 ? argv[1] : "circle";
    const int N = argc > 2 ? std::atoi(argv[2]) : (kind == "sphere" ? 16 : 256);
    const int nthreads = argc > 3 ? std::atoi(argv[3]) : 4;
    const double beta = 0.3;

    auto q = std::make_shared<SurfaceQuadrature>(
        build_quadrature(make_shape(kind, {1.0}, beta), N));
    const SpectralParameter sp(-4.0);
    std::printf("%s N=%d: %d surface nodes\n", kind.c_str(), N, q->size());

    set_num_threads(1);
    double t0 = tick();
    const DiscreteOperator m1 = assemble_M(sp, *q);
    const double ts = tick() - t0;

    set_num_threads(nthreads);
    t0 = tick();
    const DiscreteOperator mp = assemble_M(sp, *q);
    const double tp = tick() - t0;

    const double dm = (m1.a - mp.a).cwiseAbs().maxCoeff();
    std::printf("assemble_M   serial %7.3fs   %d threads %7.3fs   speedup %.2fx   "
                "max|diff| %g\n",
                ts, nthreads, tp, ts / tp, dm);

    const ProductGrid g = make_product_grid(q, 8);
    const PotentialData pd = evaluate_potential(make_potential("box", beta, 0.3), g);
    const double eps = 0.1 * beta;

    set_num_threads(1);
    t0 = tick();
    const DiscreteOperator b1 = assemble_B_eps(sp, eps, g, pd);
    const double bs = tick() - t0;

    set_num_threads(nthreads);
    t0 = tick();
    const DiscreteOperator bp = assemble_B_eps(sp, eps, g, pd);
    const double bp_t = tick() - t0;

    const double db = (b1.a - bp.a).cwiseAbs().maxCoeff();
    std::printf("assemble_B   serial %7.3fs   %d threads %7.3fs   speedup %.2fx   "
                "max|diff| %g\n",
                bs, nthreads, bp_t, bs / bp_t, db);

    if (dm != 0.0 || db != 0.0) {
        std::printf("FAIL: parallel result differs from the serial reference\n");
        return 1;
    }
    std::printf("parallel path bit-identical to the serial reference\n");
    return 0;
}
