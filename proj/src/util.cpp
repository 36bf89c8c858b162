#include "hvmhd/util.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>
#include <vector>

namespace hvmhd {

namespace {
std::atomic<bool> g_deterministic{false};
}

int thread_cap() {
    if (g_deterministic.load(std::memory_order_relaxed)) return 1;
    if (const char* env = std::getenv("HVMHD_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

void set_deterministic(bool on) { g_deterministic.store(on, std::memory_order_relaxed); }
bool deterministic() { return g_deterministic.load(std::memory_order_relaxed); }

void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t, std::size_t)>& body) {
    if (end <= begin) return;
    const std::size_t count = end - begin;
    std::size_t workers = static_cast<std::size_t>(thread_cap());
    workers = std::min(workers, count);
    if (workers <= 1) {
        body(begin, end);
        return;
    }
    // Fixed partition: worker i gets [begin + i*q + min(i,r), ...) with the
    // remainder spread over the leading chunks.
    const std::size_t q = count / workers;
    const std::size_t r = count % workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::size_t lo = begin;
    for (std::size_t i = 0; i < workers; ++i) {
        std::size_t len = q + (i < r ? 1 : 0);
        std::size_t hi = lo + len;
        pool.emplace_back([&body, lo, hi] { body(lo, hi); });
        lo = hi;
    }
    for (auto& t : pool) t.join();
}

double wrap_torus(double x) {
    double y = std::fmod(x, two_pi);
    if (y < 0.0) y += two_pi;
    // fmod can return exactly two_pi after the negative branch when x is a
    // tiny negative number; fold that back to 0.
    if (y >= two_pi) y -= two_pi;
    return y;
}

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace hvmhd
