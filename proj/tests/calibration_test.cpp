#include <algorithm>
#include <cmath>
#include <functional>

#include <gtest/gtest.h>

#include "hdcov/calibration.hpp"
#include "hdcov/distributions.hpp"
#include "hdcov/error.hpp"
#include "hdcov/rng.hpp"
#include "hdcov/statistics.hpp"

using namespace hdcov;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorCode::Io;
}

}  // namespace

TEST(Distributions, NormalQuantileAccuracy) {
    EXPECT_NEAR(upper_critical_value(0.05), 1.6448536269514722, 1e-12);
    EXPECT_NEAR(upper_critical_value(0.01), 2.3263478740408408, 1e-12);
    EXPECT_EQ(upper_critical_value(0.5), 0.0);
    for (double a : {1e-8, 1e-5, 0.001, 0.2, 0.7, 0.999, 1.0 - 1e-8})
        EXPECT_NEAR(normal_cdf(normal_quantile(a)), a, 1e-10 * std::min(a, 1.0 - a));
    EXPECT_EQ(code_of([] { normal_quantile(0.0); }), ErrorCode::BadArgument);
    EXPECT_EQ(code_of([] { normal_quantile(1.0); }), ErrorCode::BadArgument);
}

TEST(Distributions, ChiSquareAndDigamma) {
    EXPECT_NEAR(chi_square_cdf(2.0, 2.0), 1.0 - std::exp(-1.0), 1e-14);
    EXPECT_NEAR(digamma(1.0), -0.57721566490153286, 1e-14);
    EXPECT_NEAR(digamma(0.5), -0.57721566490153286 - 2.0 * std::log(2.0), 1e-14);
}

TEST(NullVariance, Examples) {
    EXPECT_NEAR(null_variance_asymptotic(TestKind::LrtIdentity, SampleShape::from_N(100, 50)), 965.735903, 1e-6);
    EXPECT_EQ(null_variance_asymptotic(TestKind::NagaoLedoitWolf, SampleShape::from_N(7, 10)), 25.0);
    EXPECT_EQ(null_variance_asymptotic(TestKind::John, SampleShape::from_N(30, 2)), 1.0);
    EXPECT_EQ(code_of([] { null_variance_asymptotic(TestKind::LrtSphericity, SampleShape::from_N(10, 10)); }),
              ErrorCode::DegenerateStatistic);
}

TEST(NullMean, NagaoExamples) {
    EXPECT_NEAR(null_mean_exact(TestKind::NagaoLedoitWolf, SampleShape::from_N(10, 4)), 0.8, 1e-15);
    EXPECT_EQ(null_mean_exact(TestKind::NagaoLedoitWolf, SampleShape::from_N(2, 4)), 0.0);
    EXPECT_EQ(code_of([] { null_mean_exact(TestKind::John, SampleShape::from_N(10, 4)); }), ErrorCode::Unsupported);
}

TEST(NullMean, LrtScalarCase) {
    // p = 1: T = (N/2)(s - 1 - log s) with N s ~ chi2_N, so E T = (N/2)(-E log s).
    const int N = 6;
    const double e_log_s = digamma(N / 2.0) + std::log(2.0 / N);
    EXPECT_NEAR(null_mean_exact(TestKind::LrtIdentity, SampleShape::from_N(N, 1)), -0.5 * N * e_log_s, 1e-12);
    EXPECT_NEAR(null_mean_exact(TestKind::LrtSphericity, SampleShape::from_N(N, 1)), 0.0, 1e-12);
}

TEST(NullMean, ExactMeansAgreeWithMonteCarlo) {
    const SampleShape shape = SampleShape::from_N(40, 12);
    for (TestKind kind : {TestKind::LrtIdentity, TestKind::NagaoLedoitWolf, TestKind::LrtSphericity}) {
        const NullCalibration c = null_calibrate_mc(kind, shape, 20000, 5);
        const double se = c.sigma / std::sqrt(c.reps);
        EXPECT_NEAR(c.m, null_mean_exact(kind, shape), 4.0 * se) << to_string(kind);
    }
}

TEST(NullCalibrateMc, NagaoExampleMean) {
    const NullCalibration c = null_calibrate_mc(TestKind::NagaoLedoitWolf, SampleShape::from_N(50, 10), 20000, 7);
    EXPECT_NEAR(c.m, 2.4, 4.0 * c.sigma / std::sqrt(20000.0));
    EXPECT_EQ(c.method, CalibrationMethod::MonteCarlo);
    EXPECT_EQ(c.reps, 20000);
    EXPECT_EQ(c.seed, 7u);
}

TEST(NullCalibrateMc, LrtVarianceNearAsymptotic) {
    const SampleShape shape = SampleShape::from_N(200, 50);
    const NullCalibration c = null_calibrate_mc(TestKind::LrtIdentity, shape, 5000, 11);
    const double v = null_variance_asymptotic(TestKind::LrtIdentity, shape);
    EXPECT_NEAR(c.sigma * c.sigma / v, 1.0, 0.10);
}

TEST(NullCalibrateMc, JohnVarianceNearAsymptotic) {
    const SampleShape shape = SampleShape::from_N(100, 100);
    const NullCalibration c = null_calibrate_mc(TestKind::John, shape, 5000, 12);
    EXPECT_NEAR(c.sigma * c.sigma / 2500.0, 1.0, 0.15);
}

TEST(NullCalibrateMc, BitwiseReproducibleAcrossThreads) {
    const SampleShape shape = SampleShape::from_N(30, 8);
    for (TestKind kind : kAllTestKinds) {
        const NullCalibration a = null_calibrate_mc(kind, shape, 500, 3, 1);
        const NullCalibration b = null_calibrate_mc(kind, shape, 500, 3, 4);
        const NullCalibration c = null_calibrate_mc(kind, shape, 500, 3, 7);
        EXPECT_EQ(a.m, b.m);
        EXPECT_EQ(a.sigma, b.sigma);
        EXPECT_EQ(a.m, c.m);
        EXPECT_EQ(a.sigma, c.sigma);
    }
}

TEST(NullCalibrateMc, DisjointSeedsAgree) {
    const SampleShape shape = SampleShape::from_N(40, 10);
    for (TestKind kind : kAllTestKinds) {
        const NullCalibration a = null_calibrate_mc(kind, shape, 20000, 101);
        const NullCalibration b = null_calibrate_mc(kind, shape, 20000, 202);
        EXPECT_GT(a.sigma, 0.0);
        EXPECT_NEAR(a.sigma / b.sigma, 1.0, 0.05) << to_string(kind);
    }
}

TEST(NullCalibrateMc, Errors) {
    EXPECT_EQ(code_of([] { null_calibrate_mc(TestKind::LrtIdentity, SampleShape{10, 20}, 1000, 1); }),
              ErrorCode::DegenerateStatistic);
    EXPECT_EQ(code_of([] { null_calibrate_mc(TestKind::John, SampleShape{10, 20}, 10, 1); }),
              ErrorCode::BadArgument);
}

TEST(NullCalibrateMc, SphericityStatisticsScaleFree) {
    for (TestKind kind : {TestKind::LrtSphericity, TestKind::John}) {
        for (int r = 0; r < 50; ++r) {
            RandomStream s(8, StreamPurpose::Verification, r);
            const Matrix z = standard_normal_matrix(20, 6, s);
            const double a = statistic_of_data(kind, z);
            for (double c : {1e-3, 0.5, 40.0})
                EXPECT_NEAR(statistic_of_data(kind, c * z), a, 1e-9 * std::max(1.0, std::abs(a)));
        }
    }
}

TEST(NullCalibrateAsymptotic, UsesExactMeanAndAsymptoticSigma) {
    const SampleShape shape = SampleShape::from_N(100, 50);
    const NullCalibration c = null_calibrate_asymptotic(TestKind::LrtIdentity, shape);
    EXPECT_EQ(c.method, CalibrationMethod::Asymptotic);
    EXPECT_EQ(c.m, null_mean_exact(TestKind::LrtIdentity, shape));
    EXPECT_NEAR(c.sigma, std::sqrt(965.735903), 1e-6);
    EXPECT_EQ(c.reps, 0);
    EXPECT_EQ(c.seed, 0u);
}

TEST(Decide, StrictInequality) {
    NullCalibration c;
    c.m = 3.0;
    c.sigma = 2.0;
    const double z = upper_critical_value(0.05);
    EXPECT_FALSE(decide_statistic(3.0 + 2.0 * z, c, 0.05).reject);
    EXPECT_TRUE(decide_statistic(std::nextafter(3.0 + 2.0 * z, 1e9), c, 0.05).reject);
    const Decision d = decide_statistic(3.0, c, 0.5);
    EXPECT_EQ(d.zscore, 0.0);
    EXPECT_FALSE(d.reject);
}

TEST(Decide, ShapeMismatchRejected) {
    const NullCalibration c = null_calibrate_asymptotic(TestKind::NagaoLedoitWolf, SampleShape{21, 5});
    RandomStream s(1, StreamPurpose::Verification, 0);
    const Matrix x = standard_normal_matrix(20, 5, s);
    EXPECT_NO_THROW(decide(TestKind::NagaoLedoitWolf, x, c, 0.05, MeanMode::Known));
    EXPECT_EQ(code_of([&] { decide(TestKind::NagaoLedoitWolf, x, c, 0.05, MeanMode::Unknown); }),
              ErrorCode::BadDimension);
    EXPECT_EQ(code_of([&] { decide(TestKind::John, x, c, 0.05, MeanMode::Known); }), ErrorCode::BadArgument);
}

TEST(CalibrationMethod, Names) {
    EXPECT_EQ(to_string(CalibrationMethod::MonteCarlo), "monte_carlo");
    EXPECT_EQ(parse_calibration_method("mc"), CalibrationMethod::MonteCarlo);
    EXPECT_EQ(parse_calibration_method("asymptotic"), CalibrationMethod::Asymptotic);
    EXPECT_EQ(code_of([] { parse_calibration_method("bootstrap"); }), ErrorCode::Parse);
}
