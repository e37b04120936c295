#pragma once

#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <span>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tg {

/// Execution path for the data-parallel kernels. `serial` is the reference
/// implementation the tests compare the OpenMP path against.
enum class Exec { serial, parallel };

inline void set_num_threads(int n) {
#ifdef _OPENMP
    if (n > 0) {
        omp_set_num_threads(n);
    }
#else
    (void)n;
#endif
}

inline int num_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

/// Tree summation; the result depends only on the order of `values`.
double pairwise_sum(std::span<const double> values);

/// Calls f(i) for i in [0, n). Exceptions are collected and the one thrown by
/// the lowest index is rethrown, so failures are reported identically on any
/// thread count.
template <class F>
void for_each_index(Exec exec, std::size_t n, F&& f) {
    if (exec == Exec::serial) {
        for (std::size_t i = 0; i < n; ++i) {
            f(i);
        }
        return;
    }
    std::exception_ptr first_error;
    std::size_t first_index = std::numeric_limits<std::size_t>::max();
    std::mutex guard;
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        try {
            f(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard lock(guard);
            if (static_cast<std::size_t>(i) < first_index) {
                first_index = static_cast<std::size_t>(i);
                first_error = std::current_exception();
            }
        }
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

/// Evaluates f at every index into a vector, in index order.
template <class T, class F>
std::vector<T> map_indices(Exec exec, std::size_t n, F&& f) {
    std::vector<T> out(n);
    for_each_index(exec, n, [&](std::size_t i) { out[i] = f(i); });
    return out;
}

}  // namespace tg
