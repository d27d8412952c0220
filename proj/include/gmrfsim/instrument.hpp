#pragma once

#include <atomic>
#include <cstdint>

namespace gmrfsim::stats {

// Global operation counters used by the complexity and storage tests.
// Relaxed ordering: counts are exact because tests run the measured region
// single-threaded; concurrent use only needs eventual totals.

inline std::atomic<std::uint64_t> matvec_calls{0};
inline std::atomic<std::uint64_t> fma_ops{0};          // one multiply-add per stored entry
inline std::atomic<std::uint64_t> work_vector_allocs{0}; // length-n scratch vectors

inline void reset() {
    matvec_calls.store(0, std::memory_order_relaxed);
    fma_ops.store(0, std::memory_order_relaxed);
    work_vector_allocs.store(0, std::memory_order_relaxed);
}

struct Snapshot {
    std::uint64_t matvec_calls;
    std::uint64_t fma_ops;
    std::uint64_t work_vector_allocs;
};

inline Snapshot snapshot() {
    return {matvec_calls.load(std::memory_order_relaxed),
            fma_ops.load(std::memory_order_relaxed),
            work_vector_allocs.load(std::memory_order_relaxed)};
}

} // namespace gmrfsim::stats
