#include "gsa/alloc_audit.hpp"

#include <atomic>

namespace gsa::alloc_audit {

namespace {
std::atomic<std::int64_t> g_live{0};
std::atomic<std::int64_t> g_peak{0};
std::atomic<std::size_t> g_max_single{0};
std::atomic<bool> g_active{false};

void bump_peak(std::int64_t live) {
    std::int64_t peak = g_peak.load(std::memory_order_relaxed);
    while (live > peak &&
           !g_peak.compare_exchange_weak(peak, live, std::memory_order_relaxed)) {
    }
}
}  // namespace

std::int64_t live_bytes() { return g_live.load(std::memory_order_relaxed); }

std::size_t max_single_allocation() {
    return g_max_single.load(std::memory_order_relaxed);
}

std::int64_t peak_live_bytes() { return g_peak.load(std::memory_order_relaxed); }

void reset_window() {
    g_peak.store(g_live.load(std::memory_order_relaxed), std::memory_order_relaxed);
    g_max_single.store(0, std::memory_order_relaxed);
}

bool hooks_active() { return g_active.load(std::memory_order_relaxed); }

void mark_active() { g_active.store(true, std::memory_order_relaxed); }

void record_alloc(std::size_t bytes) {
    const std::int64_t live =
        g_live.fetch_add(static_cast<std::int64_t>(bytes),
                         std::memory_order_relaxed) +
        static_cast<std::int64_t>(bytes);
    bump_peak(live);
    std::size_t prev = g_max_single.load(std::memory_order_relaxed);
    while (bytes > prev && !g_max_single.compare_exchange_weak(
                               prev, bytes, std::memory_order_relaxed)) {
    }
}

void record_free(std::size_t bytes) {
    g_live.fetch_sub(static_cast<std::int64_t>(bytes), std::memory_order_relaxed);
}

}  // namespace gsa::alloc_audit
