#include "uaplab/threads.hpp"

#include <omp.h>

#include <atomic>
#include <cstdlib>

namespace uaplab {

namespace {
std::atomic<int> g_cap{0};
}

int worker_count() {
    int n = omp_get_max_threads();
    if (const char* env = std::getenv("UAPLAB_THREADS")) {
        int cap = std::atoi(env);
        if (cap >= 1 && cap < n) n = cap;
    }
    int cap = g_cap.load(std::memory_order_relaxed);
    if (cap >= 1 && cap < n) n = cap;
    return n < 1 ? 1 : n;
}

void set_worker_cap(int n) {
    g_cap.store(n, std::memory_order_relaxed);
}

} // namespace uaplab
