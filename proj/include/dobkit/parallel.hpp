#pragma once

#include <cstddef>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace dobkit::par {

// Process-wide switch so tests and the benchmark can compare the OpenMP
// kernels against the serial reference on identical inputs.
void set_enabled(bool on);
bool enabled();
int max_threads();

// Runs fn(i) for i in [0, n). With OpenMP enabled the iterations are
// distributed statically; fn must only write to per-index slots so the
// result is identical to the serial reference bit for bit.
template <typename Fn>
void for_each_index(std::size_t n, Fn&& fn) {
#if defined(_OPENMP)
    if (enabled() && n > 1) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            fn(static_cast<std::size_t>(i));
        }
        return;
    }
#endif
    for (std::size_t i = 0; i < n; ++i) {
        fn(i);
    }
}

}  // namespace dobkit::par
