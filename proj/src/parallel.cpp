#include "dobkit/parallel.hpp"

#include <atomic>

namespace dobkit::par {

namespace {
std::atomic<bool> g_enabled{true};
}

void set_enabled(bool on) { g_enabled.store(on, std::memory_order_relaxed); }

bool enabled() { return g_enabled.load(std::memory_order_relaxed); }

int max_threads() {
#if defined(_OPENMP)
    return enabled() ? omp_get_max_threads() : 1;
#else
    return 1;
#endif
}

}  // namespace dobkit::par
