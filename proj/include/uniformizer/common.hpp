#pragma once

// Shared scalar types and small numeric utilities used across the library.
//
// Parallel reductions are deterministic by construction: the index range is
// cut into fixed-size blocks, block results are computed (possibly on several
// threads) and then folded in block order.  The result is therefore
// bit-identical no matter how many worker threads are available.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace uniformizer {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;

inline double sqr(double x) { return x * x; }
inline double abs2(cplx z) { return z.real() * z.real() + z.imag() * z.imag(); }

inline bool is_finite(cplx z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// Worker-thread cap.  UNIFORMIZER_THREADS overrides hardware concurrency;
// values < 1 are treated as 1.
inline unsigned thread_budget() {
    if (const char* env = std::getenv("UNIFORMIZER_THREADS")) {
        long n = std::strtol(env, nullptr, 10);
        if (n >= 1) return static_cast<unsigned>(n);
        return 1;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

namespace detail {

inline constexpr std::size_t reduce_block = 4096;

// Run fn(block_index) for block_index in [0, nblocks) on up to `threads`
// threads.  Blocks are claimed through an atomic counter; each block's
// result must be written to a slot owned by that block, so scheduling
// order cannot affect the outcome.
template <class Fn>
void run_blocks(std::size_t nblocks, Fn&& fn) {
    unsigned threads = std::min<std::size_t>(thread_budget(), nblocks);
    if (threads <= 1) {
        for (std::size_t b = 0; b < nblocks; ++b) fn(b);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t b = next.fetch_add(1);
            if (b >= nblocks) return;
            fn(b);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

} // namespace detail

// Deterministic parallel sum of term(i) for i in [0, n).  T must be
// value-initialisable to zero (double, cplx, small aggregates with +=).
template <class T, class Term>
T block_sum(std::size_t n, Term&& term) {
    if (n == 0) return T{};
    const std::size_t nblocks = (n + detail::reduce_block - 1) / detail::reduce_block;
    std::vector<T> partial(nblocks, T{});
    detail::run_blocks(nblocks, [&](std::size_t b) {
        const std::size_t lo = b * detail::reduce_block;
        const std::size_t hi = std::min(n, lo + detail::reduce_block);
        T acc{};
        for (std::size_t i = lo; i < hi; ++i) acc += term(i);
        partial[b] = acc;
    });
    T total{};
    for (const T& p : partial) total += p;
    return total;
}

// Deterministic parallel fill: out[i] = fn(i).
template <class T, class Fn>
void block_map(std::vector<T>& out, Fn&& fn) {
    const std::size_t n = out.size();
    if (n == 0) return;
    const std::size_t nblocks = (n + detail::reduce_block - 1) / detail::reduce_block;
    detail::run_blocks(nblocks, [&](std::size_t b) {
        const std::size_t lo = b * detail::reduce_block;
        const std::size_t hi = std::min(n, lo + detail::reduce_block);
        for (std::size_t i = lo; i < hi; ++i) out[i] = fn(i);
    });
}

} // namespace uniformizer
