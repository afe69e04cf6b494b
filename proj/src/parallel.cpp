#include "clinpred/parallel.hpp"

#include <atomic>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace clinpred {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
#ifdef _OPENMP
    // exceptions must not unwind through the OpenMP region: capture the one
    // thrown by the lowest index and rethrow afterwards, so failures are
    // deterministic regardless of scheduling
    std::exception_ptr pending = nullptr;
    std::atomic<long long> first_failure{static_cast<long long>(n)};
    #pragma omp parallel for num_threads(threads) schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        if (static_cast<long long>(i) > first_failure.load(std::memory_order_relaxed)) continue;
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            long long expected = first_failure.load();
            while (i < expected && !first_failure.compare_exchange_weak(expected, i)) {
            }
            #pragma omp critical(clinpred_parallel_for_exception)
            {
                if (first_failure.load() == i) pending = std::current_exception();
            }
        }
    }
    if (pending) std::rethrow_exception(pending);
#else
    for (std::size_t i = 0; i < n; ++i) body(i);
#endif
}

int hardware_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace clinpred
