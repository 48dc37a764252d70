#pragma once

#include <cstdint>
#include <span>

namespace hdcov {

/// Monte Carlo estimate; std_error = sample sd / sqrt(reps).
struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    int reps = 0;
    std::uint64_t seed = 0;
};

McEstimate estimate_from_samples(std::span<const double> samples, std::uint64_t seed);

/// |value - target| <= k * std_error.
bool within_se(const McEstimate& est, double target, double k);

}  // namespace hdcov
