#pragma once
#include <cstddef>

namespace ds {

// Global thread count for assembly loops (1 = serial reference path).
// Summation inside each row is always sequential, so results are
// bit-identical for any thread count.
void set_num_threads(int n);
int num_threads();

namespace detail {
void run_rows_omp(std::ptrdiff_t n, void* ctx, void (*fn)(void*, std::ptrdiff_t));
}

// Parallel-for over rows via OpenMP (static schedule, deterministic work
// split).  Falls back to a plain serial loop when num_threads() == 1.
template <class F>
void for_each_row(std::ptrdiff_t n, F&& f)
{
    if (num_threads() == 1) {
        for (std::ptrdiff_t i = 0; i < n; ++i) f(i);
        return;
    }
    auto thunk = [](void* ctx, std::ptrdiff_t i) { (*static_cast<F*>(ctx))(i); };
    detail::run_rows_omp(n, const_cast<void*>(static_cast<const void*>(&f)), thunk);
}

} // namespace ds
