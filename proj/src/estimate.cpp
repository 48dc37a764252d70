#include "hdcov/estimate.hpp"

#include <cmath>

#include "hdcov/parallel.hpp"

namespace hdcov {

McEstimate estimate_from_samples(std::span<const double> samples, std::uint64_t seed) {
    const auto moments = sample_moments(samples);
    McEstimate out;
    out.value = moments.mean;
    out.reps = static_cast<int>(samples.size());
    out.std_error = samples.empty() ? 0.0 : moments.sd / std::sqrt(static_cast<double>(samples.size()));
    out.seed = seed;
    return out;
}

bool within_se(const McEstimate& est, double target, double k) {
    return std::abs(est.value - target) <= k * est.std_error;
}

}  // namespace hdcov
