#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <vector>

namespace hdcov {

/// Worker count: explicit value if positive, else HDCOV_THREADS, else the
/// hardware concurrency (at least 1).
unsigned resolve_threads(std::optional<int> requested = std::nullopt);

/// Evaluates body(r) for r in [0, count) on `threads` workers with a static
/// contiguous partition. Each result lands in slot r, so the output does not
/// depend on the worker count. The first exception thrown by any replicate is
/// rethrown after all workers join.
template <typename T, typename Body>
std::vector<T> run_replicates(std::size_t count, unsigned threads, Body&& body) {
    std::vector<T> results(count);
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, count));
    if (workers <= 1) {
        for (std::size_t r = 0; r < count; ++r) results[r] = body(r);
        return results;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = count * w / workers;
            const std::size_t end = count * (w + 1) / workers;
            pool.emplace_back([&, begin, end] {
                try {
                    for (std::size_t r = begin; r < end; ++r) results[r] = body(r);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
    return results;
}

/// Pairwise (tree) summation over fixed index ranges; bitwise stable for a
/// given input order.
double pairwise_sum(std::span<const double> values);

struct SampleMoments {
    double mean = 0.0;
    double sd = 0.0;  // n - 1 denominator
};

/// Two-pass mean and standard deviation built on pairwise_sum.
SampleMoments sample_moments(std::span<const double> values);

}  // namespace hdcov
