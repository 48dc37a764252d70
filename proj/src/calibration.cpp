#include "hdcov/calibration.hpp"

#include <cmath>

#include "hdcov/distributions.hpp"
#include "hdcov/error.hpp"
#include "hdcov/parallel.hpp"
#include "hdcov/rng.hpp"
#include "hdcov/statistics.hpp"

namespace hdcov {

std::string_view to_string(CalibrationMethod method) {
    switch (method) {
        case CalibrationMethod::Asymptotic: return "asymptotic";
        case CalibrationMethod::Exact: return "exact";
        case CalibrationMethod::MonteCarlo: return "monte_carlo";
    }
    return "unknown";
}

CalibrationMethod parse_calibration_method(std::string_view text) {
    if (text == "asymptotic") return CalibrationMethod::Asymptotic;
    if (text == "exact") return CalibrationMethod::Exact;
    if (text == "monte_carlo" || text == "mc") return CalibrationMethod::MonteCarlo;
    fail(ErrorCode::Parse, "unknown calibration method '" + std::string(text) + "'");
}

double null_variance_asymptotic(TestKind kind, const SampleShape& shape) {
    require_nondegenerate(kind, shape);
    const double p = shape.p;
    if (is_lrt(kind)) {
        const double n = shape.N();
        const double y = shape.y();
        return 0.5 * n * n * (-y - std::log1p(-y));
    }
    return 0.25 * p * p;
}

double null_mean_exact(TestKind kind, const SampleShape& shape) {
    require_nondegenerate(kind, shape);
    const double n = shape.N();
    const double p = shape.p;
    // E log det S for S = W / N, W ~ Wishart_p(N, I).
    auto expected_log_det = [&] {
        double total = 0.0;
        for (int i = 1; i <= shape.p; ++i) total += digamma(0.5 * (n - i + 1.0));
        return total + p * std::log(2.0 / n);
    };
    switch (kind) {
        case TestKind::NagaoLedoitWolf:
            return 0.25 * p * (1.0 - 2.0 / n);
        case TestKind::LrtIdentity:
            // E tr S = p, so the trace and -p cancel.
            return -0.5 * n * expected_log_det();
        case TestKind::LrtSphericity: {
            const double expected_log_trace = digamma(0.5 * n * p) + std::log(2.0 / n);
            return 0.5 * n * (p * expected_log_trace - expected_log_det() - p * std::log(p));
        }
        case TestKind::John:
            fail(ErrorCode::Unsupported, "john has no closed-form null mean; use Monte Carlo calibration");
    }
    fail(ErrorCode::BadArgument, "unknown test kind");
}

NullCalibration null_calibrate_mc(TestKind kind, const SampleShape& shape, int reps, std::uint64_t seed,
                                  std::optional<int> threads) {
    require_nondegenerate(kind, shape);
    if (reps < 100) fail(ErrorCode::BadArgument, "Monte Carlo calibration needs reps >= 100");
    const int N = shape.N();
    const int p = shape.p;
    const auto values = run_replicates<double>(static_cast<std::size_t>(reps), resolve_threads(threads),
                                               [&](std::size_t r) {
                                                   RandomStream stream(seed, StreamPurpose::NullCalibration, r);
                                                   const Matrix z = standard_normal_matrix(N, p, stream);
                                                   return statistic_of_data(kind, z);
                                               });
    const auto moments = sample_moments(values);
    NullCalibration out;
    out.kind = kind;
    out.n = shape.n;
    out.p = p;
    out.m = moments.mean;
    out.sigma = moments.sd;
    out.method = CalibrationMethod::MonteCarlo;
    out.reps = reps;
    out.seed = seed;
    if (!(out.sigma > 0.0)) fail(ErrorCode::DegenerateStatistic, "null statistic has zero spread");
    return out;
}

NullCalibration null_calibrate_asymptotic(TestKind kind, const SampleShape& shape) {
    NullCalibration out;
    out.kind = kind;
    out.n = shape.n;
    out.p = shape.p;
    out.m = null_mean_exact(kind, shape);
    out.sigma = std::sqrt(null_variance_asymptotic(kind, shape));
    out.method = CalibrationMethod::Asymptotic;
    return out;
}

Decision decide_statistic(double statistic, const NullCalibration& calib, double alpha) {
    const double z_alpha = upper_critical_value(alpha);
    if (!(calib.sigma > 0.0)) fail(ErrorCode::BadArgument, "calibration sigma must be positive");
    Decision d;
    d.statistic = statistic;
    d.zscore = (statistic - calib.m) / calib.sigma;
    d.reject = d.zscore > z_alpha;
    return d;
}

Decision decide(TestKind kind, const DataMatrix& x, const NullCalibration& calib, double alpha, MeanMode mode) {
    if (calib.kind != kind) fail(ErrorCode::BadArgument, "calibration is for a different test");
    const int rows = static_cast<int>(x.rows());
    const SampleShape shape = mode == MeanMode::Known ? SampleShape::from_N(rows, static_cast<int>(x.cols()))
                                                      : SampleShape{rows, static_cast<int>(x.cols())};
    if (!(shape == calib.shape())) {
        fail(ErrorCode::BadDimension, "data shape (n=" + std::to_string(shape.n) + ", p=" + std::to_string(shape.p) +
                                          ") does not match calibration (n=" + std::to_string(calib.n) +
                                          ", p=" + std::to_string(calib.p) + ")");
    }
    require_nondegenerate(kind, shape);
    const Matrix s = mode == MeanMode::Known ? sample_cov_known_mean(x) : sample_cov_unknown_mean(x).s;
    return decide_statistic(statistic(kind, s, shape.N()), calib, alpha);
}

}  // namespace hdcov
