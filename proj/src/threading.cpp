#include "gsa/threading.hpp"

#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace gsa::threading {

namespace {
std::atomic<unsigned> g_threads{0};
}

void set_num_threads(unsigned n) { g_threads.store(n); }

unsigned num_threads() {
    unsigned n = g_threads.load();
    if (n == 0) {
        n = std::thread::hardware_concurrency();
        if (n == 0) n = 1;
    }
    return n;
}

void parallel_chunks(std::size_t total,
                     const std::function<void(std::size_t, std::size_t)>& fn) {
    if (total == 0) return;
    const std::size_t workers = std::min<std::size_t>(num_threads(), total);
    if (workers <= 1) {
        fn(0, total);
        return;
    }

    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (total + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(total, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, w, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

void parallel_for(std::size_t total, const std::function<void(std::size_t)>& fn) {
    parallel_chunks(total, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) fn(i);
    });
}

}  // namespace gsa::threading
