// summation.hpp - Compensated accumulation and deterministic chunked parallel loops

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace decometric {

// Neumaier's variant of Kahan summation. Result depends only on the order of add() calls.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    void add(const CompensatedSum& other) {
        add(other.sum_);
        add(other.comp_);
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_{0.0};
    double comp_{0.0};
};

inline unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

/// Runs body(chunk) for chunk in [0, n_chunks) on up to `threads` workers.
/// Chunks are claimed dynamically; callers store per-chunk results and merge them
/// in chunk order, so the outcome does not depend on the worker count.
template <class Body>
void parallel_chunks(std::size_t n_chunks, unsigned threads, Body&& body) {
    const unsigned workers = static_cast<unsigned>(
        std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(n_chunks, 1)));
    if (workers <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) body(c);
        return;
    }
    std::size_t next = 0;
    std::mutex mtx;
    std::exception_ptr failure;
    auto worker = [&] {
        for (;;) {
            std::size_t c;
            {
                std::lock_guard lock(mtx);
                if (next >= n_chunks || failure) return;
                c = next++;
            }
            try {
                body(c);
            } catch (...) {
                std::lock_guard lock(mtx);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

} // namespace decometric
