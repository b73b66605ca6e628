#include "deltashell/parallel.hpp"

#include <omp.h>

#include <algorithm>

namespace ds {

namespace {
int g_threads = 1;
}

void set_num_threads(int n)
{
    g_threads = std::max(1, n);
}

int num_threads()
{
    return g_threads;
}

namespace detail {

void run_rows_omp(std::ptrdiff_t n, void* ctx, void (*fn)(void*, std::ptrdiff_t))
{
#pragma omp parallel for schedule(static) num_threads(g_threads)
    for (std::ptrdiff_t i = 0; i < n; ++i) fn(ctx, i);
}

} // namespace detail
} // namespace ds
