#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "hdcov/types.hpp"

namespace hdcov {

enum class CalibrationMethod { Asymptotic, Exact, MonteCarlo };

std::string_view to_string(CalibrationMethod method);
CalibrationMethod parse_calibration_method(std::string_view text);

/// Null location and scale of a statistic at a given (n, p).
struct NullCalibration {
    TestKind kind = TestKind::LrtIdentity;
    int n = 0;
    int p = 0;
    double m = 0.0;
    double sigma = 1.0;
    CalibrationMethod method = CalibrationMethod::MonteCarlo;
    int reps = 0;
    std::uint64_t seed = 0;

    SampleShape shape() const { return {n, p}; }
};

/// Leading-order null variance sigma^2.
double null_variance_asymptotic(TestKind kind, const SampleShape& shape);

/// Exact finite-sample null mean. Nagao has a closed form; the two LRT means
/// come from the digamma identity for E log det of a Wishart matrix. John has
/// none (Unsupported).
double null_mean_exact(TestKind kind, const SampleShape& shape);

/// Mean and standard deviation of the statistic over `reps` null datasets of
/// N = n - 1 standard normal rows.
NullCalibration null_calibrate_mc(TestKind kind, const SampleShape& shape, int reps, std::uint64_t seed,
                                  std::optional<int> threads = std::nullopt);

/// Exact mean (where available) with asymptotic sigma. Unsupported for john.
NullCalibration null_calibrate_asymptotic(TestKind kind, const SampleShape& shape);

struct Decision {
    double statistic = 0.0;
    double zscore = 0.0;
    bool reject = false;
};

/// Rejects iff (T - m) / sigma > z_alpha.
Decision decide_statistic(double statistic, const NullCalibration& calib, double alpha);

enum class MeanMode { Known, Unknown };

/// Applies the decision rule to data. Known mean: N = rows. Unknown mean:
/// n = rows and S is the rescaled centered estimator. The calibration must
/// match the resulting (n, p).
Decision decide(TestKind kind, const DataMatrix& x, const NullCalibration& calib, double alpha,
                MeanMode mode = MeanMode::Known);

}  // namespace hdcov
