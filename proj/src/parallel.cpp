#include "hdcov/parallel.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace hdcov {

unsigned resolve_threads(std::optional<int> requested) {
    if (requested && *requested > 0) return static_cast<unsigned>(*requested);
    if (const char* env = std::getenv("HDCOV_THREADS")) {
        try {
            const int value = std::stoi(env);
            if (value > 0) return static_cast<unsigned>(value);
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

double pairwise_sum(std::span<const double> values) {
    constexpr std::size_t kLeaf = 32;
    if (values.size() <= kLeaf) {
        double total = 0.0;
        for (double v : values) total += v;
        return total;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

SampleMoments sample_moments(std::span<const double> values) {
    SampleMoments out;
    const std::size_t n = values.size();
    if (n == 0) return out;
    out.mean = pairwise_sum(values) / static_cast<double>(n);
    if (n < 2) return out;
    std::vector<double> squared(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = values[i] - out.mean;
        squared[i] = d * d;
    }
    out.sd = std::sqrt(pairwise_sum(squared) / static_cast<double>(n - 1));
    return out;
}

}  // namespace hdcov
