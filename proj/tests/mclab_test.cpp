#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <gtest/gtest.h>

#include "hdcov/calibration.hpp"
#include "hdcov/distributions.hpp"
#include "hdcov/error.hpp"
#include "hdcov/mclab.hpp"
#include "hdcov/model.hpp"
#include "hdcov/power.hpp"
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

Matrix normal(int rows, int cols, std::uint64_t seed) {
    RandomStream s(seed, StreamPurpose::Verification, 0);
    return standard_normal_matrix(rows, cols, s);
}

Matrix spiked(int p, std::vector<double> a) {
    a.resize(p, 0.0);
    return build_covariance(CovarianceSpec::spiked(a));
}

/// E s^k for s = chi2_N / N.
double chi2_mean_power(int N, int k) {
    double v = 1.0;
    for (int i = 0; i < k; ++i) v *= (N + 2.0 * i) / N;
    return v;
}

}  // namespace

TEST(GaussianSample, ZeroCovarianceGivesMean) {
    const Vector mu = (Vector(3) << 1.0, -2.0, 0.5).finished();
    const Matrix x = gaussian_sample(Matrix::Zero(3, 3), mu, 5, 1);
    for (int i = 0; i < 5; ++i) EXPECT_EQ(x.row(i), mu.transpose());
}

TEST(GaussianSample, Deterministic) {
    const Matrix sigma = spiked(4, {1.0, 0.5});
    EXPECT_EQ(gaussian_sample(sigma, Vector(), 50, 9), gaussian_sample(sigma, Vector(), 50, 9));
    EXPECT_NE(gaussian_sample(sigma, Vector(), 50, 9), gaussian_sample(sigma, Vector(), 50, 10));
}

TEST(GaussianSample, CovarianceConverges) {
    const Matrix sigma = Eigen::Vector2d(2.0, 1.0).asDiagonal();
    const Matrix x = gaussian_sample(sigma, Vector(), 100000, 3);
    const Matrix s = x.transpose() * x / 100000.0;
    EXPECT_NEAR(s(0, 0), 2.0, 0.1);
    EXPECT_NEAR(s(1, 1), 1.0, 0.05);
    EXPECT_NEAR(s(0, 1), 0.0, 0.05);
}

TEST(GaussianSample, DenseCovariance) {
    Matrix sigma(2, 2);
    sigma << 2.0, 0.8, 0.8, 1.0;
    const Matrix x = gaussian_sample(sigma, Vector(), 100000, 4);
    EXPECT_LE(((x.transpose() * x / 100000.0) - sigma).cwiseAbs().maxCoeff(), 0.05);
}

TEST(GaussianSample, IndefiniteRejected) {
    Matrix m(2, 2);
    m << 1, 2, 2, 1;
    EXPECT_EQ(code_of([&] { gaussian_sample(m, Vector(), 3, 1); }), ErrorCode::NotPSD);
}

TEST(EmpiricalPower, SizeAtNull) {
    const SampleShape shape = SampleShape::from_N(120, 40);
    for (TestKind kind : kAllTestKinds) {
        const NullCalibration c = null_calibrate_mc(kind, shape, 10000, 1);
        const McEstimate e = empirical_power(kind, Matrix::Identity(40, 40), shape, 0.05, c, 4000, 2);
        EXPECT_NEAR(e.value, 0.05, 3.0 * std::sqrt(0.05 * 0.95 / 4000)) << to_string(kind);
        EXPECT_NEAR(e.std_error, std::sqrt(e.value * (1.0 - e.value) / 4000), 1e-15);
    }
}

TEST(EmpiricalPower, LrtMatchesAnalytic) {
    const SampleShape shape = SampleShape::from_N(200, 50);
    const NullCalibration c = null_calibrate_mc(TestKind::LrtIdentity, shape, 5000, 3);
    const Matrix sigma = spiked(50, {2.0});
    const McEstimate e = empirical_power(TestKind::LrtIdentity, sigma, shape, 0.05, c, 2000, 4);
    const double beta = analytic_power(TestKind::LrtIdentity, sigma, shape, 0.05).power;
    EXPECT_NEAR(e.value, beta, 0.05);
}

TEST(EmpiricalPower, JohnHighDimensionalMatchesAnalytic) {
    const SampleShape shape = SampleShape::from_N(100, 200);
    const NullCalibration c = null_calibrate_mc(TestKind::John, shape, 3000, 5);
    std::vector<double> a(200, 0.0);
    a[0] = 2.0;
    const Matrix sigma = spiked(200, a);
    const McEstimate e = empirical_power(TestKind::John, sigma, shape, 0.05, c, 2000, 6);
    EXPECT_NEAR(e.value, spiked_power(TestKind::John, a, shape, 0.05), 0.05);
}

TEST(EmpiricalPower, ReproducibleAcrossThreads) {
    const SampleShape shape{31, 6};
    const NullCalibration c = null_calibrate_asymptotic(TestKind::NagaoLedoitWolf, shape);
    const Matrix sigma = spiked(6, {0.8});
    const McEstimate a = empirical_power(TestKind::NagaoLedoitWolf, sigma, shape, 0.05, c, 500, 7, 1);
    const McEstimate b = empirical_power(TestKind::NagaoLedoitWolf, sigma, shape, 0.05, c, 500, 7, 6);
    EXPECT_EQ(a.value, b.value);
}

TEST(Kolmogorov, ExactAtOrderStatistics) {
    const std::vector<double> one = {0.0};
    EXPECT_DOUBLE_EQ(kolmogorov_distance_normal(one), 0.5);
    const std::vector<double> two = {-1.0, 1.0};
    EXPECT_NEAR(kolmogorov_distance_normal(two), std::max(normal_cdf(-1.0), 0.5 - normal_cdf(-1.0)), 1e-15);
}

TEST(Kolmogorov, StandardNormalWithinDkw) {
    const int reps = 20000;
    RandomStream s(12, StreamPurpose::Verification, 0);
    std::vector<double> x(reps);
    for (double& v : x) v = s.normal();
    const double d = kolmogorov_distance_normal(x);
    EXPECT_GT(d, 0.0);
    EXPECT_LE(d, 1.36 / std::sqrt(reps));
}

TEST(NullClt, LrtDistanceSmall) {
    const CltCheck c = null_clt_check(TestKind::LrtIdentity, SampleShape::from_N(200, 50), 5000, 13);
    EXPECT_LE(c.d_kol, 0.05);
    EXPECT_EQ(c.reps, 5000);
}

TEST(NullClt, NeedsEnoughReps) {
    EXPECT_EQ(code_of([] { null_clt_check(TestKind::John, SampleShape::from_N(20, 5), 999, 1); }),
              ErrorCode::BadArgument);
}

TEST(WishartOracle, Examples) {
    EXPECT_NEAR(wishart_trace_oracle("E_tr_S3", Matrix::Identity(2, 2), SampleShape::from_N(2, 2)), 18.0, 1e-12);
    for (int p : {1, 3, 7})
        EXPECT_NEAR(wishart_trace_oracle(WishartMoment::Tr2S, Matrix::Identity(p, p), SampleShape::from_N(5, p)),
                    p * p + 2.0 * p / 5.0, 1e-12);
}

TEST(WishartOracle, ScalarCaseMatchesChiSquareMoments) {
    const int powers[7] = {2, 2, 3, 3, 3, 4, 4};
    for (int N : {1, 3, 10, 40})
        for (int k = 0; k < 7; ++k)
            EXPECT_NEAR(wishart_trace_oracle(kAllWishartMoments[k], Matrix::Identity(1, 1), SampleShape::from_N(N, 1)),
                        chi2_mean_power(N, powers[k]), 1e-10 * chi2_mean_power(N, powers[k]))
                << to_string(kAllWishartMoments[k]) << " N=" << N;
}

TEST(WishartOracle, Errors) {
    EXPECT_EQ(code_of([] { wishart_trace_oracle("E_tr_S5", Matrix::Identity(2, 2), SampleShape::from_N(4, 2)); }),
              ErrorCode::UnknownMoment);
    const Matrix d = Eigen::Vector2d(2.0, 1.0).asDiagonal();
    EXPECT_EQ(code_of([&] { wishart_trace_oracle(WishartMoment::TrS3, d, SampleShape::from_N(4, 2)); }),
              ErrorCode::Unsupported);
    EXPECT_NO_THROW(wishart_trace_oracle(WishartMoment::TrS2, d, SampleShape::from_N(4, 2)));
}

TEST(WishartOracle, GeneralSigmaSecondOrderFormulas) {
    const Vector diag = (Vector(3) << 2.0, 0.5, 1.5).finished();
    const Matrix sigma = diag.asDiagonal();
    const SampleShape shape = SampleShape::from_N(7, 3);
    const double tr = diag.sum(), tr2 = diag.squaredNorm();
    EXPECT_NEAR(wishart_trace_oracle(WishartMoment::TrS2, sigma, shape), (1.0 + 1.0 / 7) * tr2 + tr * tr / 7, 1e-12);
    EXPECT_NEAR(wishart_trace_oracle(WishartMoment::Tr2S, sigma, shape), tr * tr + 2.0 * tr2 / 7, 1e-12);
}

TEST(WishartOracle, MatchesMonteCarlo) {
    for (const auto& [N, p] : {std::pair{20, 10}, std::pair{40, 10}, std::pair{10, 20}}) {
        const SampleShape shape = SampleShape::from_N(N, p);
        const auto mc = wishart_trace_mc(Matrix::Identity(p, p), shape, 50000, 14);
        for (int k = 0; k < 7; ++k) {
            const double oracle = wishart_trace_oracle(kAllWishartMoments[k], Matrix::Identity(p, p), shape);
            EXPECT_TRUE(within_se(mc[k], oracle, 4.0))
                << to_string(kAllWishartMoments[k]) << " N=" << N << " p=" << p << " mc=" << mc[k].value
                << " se=" << mc[k].std_error << " oracle=" << oracle;
        }
    }
}

TEST(WishartOracle, GeneralSigmaMatchesMonteCarlo) {
    RandomStream s(15, StreamPurpose::Verification, 0);
    Vector diag(10);
    for (double& v : diag) v = 0.3 + 2.0 * s.uniform();
    const Matrix sigma = diag.asDiagonal();
    const SampleShape shape = SampleShape::from_N(20, 10);
    const auto mc = wishart_trace_mc(sigma, shape, 50000, 16);
    for (int k = 0; k < 7; ++k) {
        if (!wishart_moment_general_sigma(kAllWishartMoments[k])) continue;
        EXPECT_TRUE(within_se(mc[k], wishart_trace_oracle(kAllWishartMoments[k], sigma, shape), 4.0));
    }
}

TEST(WishartOracle, Names) {
    for (WishartMoment m : kAllWishartMoments) EXPECT_EQ(parse_wishart_moment(to_string(m)), m);
}

TEST(InverseMoment, GridStability) {
    std::vector<double> values;
    for (int N : {40, 80, 160}) values.push_back(inverse_opnorm_moment_mc(SampleShape::from_N(N, N / 2), 1.0, 2000, 17).value);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    EXPECT_LE(*hi / *lo, 1.25);
}

TEST(InverseMoment, ScalarCase) {
    // p = 1: E[N / chi2_N] = N / (N - 2).
    const McEstimate e = inverse_opnorm_moment_mc(SampleShape::from_N(30, 1), 1.0, 20000, 18);
    EXPECT_NEAR(e.value, 30.0 / 28.0, 4.0 * e.std_error);
}

TEST(InverseMoment, Errors) {
    EXPECT_EQ(code_of([] { inverse_opnorm_moment_mc(SampleShape::from_N(40, 20), 3.0, 100, 1); }),
              ErrorCode::RatioTooLarge);
    EXPECT_EQ(code_of([] { inverse_opnorm_moment_mc(SampleShape::from_N(40, 38), 0.1, 100, 1); }),
              ErrorCode::RatioTooLarge);
}

TEST(UMatrix, SemigroupAndNorms) {
    const int N = 6, p = 3;
    for (int k = 0; k < 5; ++k) {
        const Matrix x = normal(N, p, 100 + k);
        const Matrix s = x.transpose() * x / N;
        const double s_norm = symmetric_opnorm(s), inv_norm = symmetric_opnorm(s.inverse());
        for (int l = 0; l <= 4; ++l)
            for (int m = 0; l + m <= 4; ++m) {
                const Matrix u = u_matrix(l, m, USign::Inverse, x).entries;
                const Matrix up = u_matrix(l, m, USign::Plus, x).entries;
                EXPECT_LE((u - u.transpose()).cwiseAbs().maxCoeff(), 1e-9);
                EXPECT_LE(symmetric_opnorm(up), std::pow(s_norm, l + m + 1) * (1.0 + 1e-9));
                if (l >= 1) {
                    const double expected = std::pow(inv_norm, l + m - 1);
                    EXPECT_NEAR(symmetric_opnorm(u), expected, 1e-9 * expected);
                }
                for (int l2 = 1; l + l2 <= 5; ++l2)
                    for (int m2 = 0; m + m2 <= 4; ++m2) {
                        if (l < 1) continue;
                        const Matrix lhs = u * u_matrix(l2, m2, USign::Inverse, x).entries;
                        const Matrix rhs = u_matrix(l + l2 - 1, m + m2, USign::Inverse, x).entries;
                        EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, rhs.cwiseAbs().maxCoeff()));
                        const Matrix lhs_p = up * u_matrix(l2, m2, USign::Plus, x).entries;
                        const Matrix rhs_p = u_matrix(l + l2 + 1, m + m2, USign::Plus, x).entries;
                        EXPECT_LE((lhs_p - rhs_p).cwiseAbs().maxCoeff(),
                                  1e-9 * std::max(1.0, rhs_p.cwiseAbs().maxCoeff()));
                    }
            }
    }
}

TEST(UMatrix, Guards) {
    EXPECT_EQ(code_of([] { u_matrix(1, 1, USign::Plus, Matrix::Ones(100, 21)); }), ErrorCode::TooLarge);
    EXPECT_EQ(code_of([] { u_matrix(1, 1, USign::Inverse, Matrix::Ones(3, 5)); }), ErrorCode::DegenerateStatistic);
}

TEST(FourthMoment, Examples) {
    const FourthMomentCheck zero = fourth_moment_bound_check(Matrix::Zero(3, 3), 5, 1000, 1);
    EXPECT_EQ(zero.lhs.value, 0.0);
    EXPECT_EQ(zero.rhs, 0.0);
    EXPECT_TRUE(zero.holds);
    const FourthMomentCheck id = fourth_moment_bound_check(Matrix::Identity(2, 2), 3, 40000, 2);
    EXPECT_EQ(id.rhs, 60.0);
    EXPECT_NEAR(id.lhs.value, 48.0, 4.0 * id.lhs.std_error);
    EXPECT_TRUE(id.holds);
}

TEST(FourthMoment, RandomMatrices) {
    for (int k = 0; k < 20; ++k) {
        const Matrix a = normal(4, 4, 300 + k);
        EXPECT_TRUE(fourth_moment_bound_check(a, 6, 2000, 400 + k).holds) << k;
    }
}

TEST(TraceTail, Examples) {
    const TailCheck big = trace_concentration_tail_check(Matrix::Identity(10, 10), SampleShape::from_N(50, 10), 100000, 1);
    EXPECT_EQ(big.tail.value, 0.0);
    EXPECT_TRUE(big.holds);

    const TailCheck scalar = trace_concentration_tail_check(Matrix::Identity(1, 1), SampleShape::from_N(5, 1), 40000, 2);
    const double exact = chi_square_cdf(2.5, 5.0);
    EXPECT_GT(scalar.tail.value, 0.0);
    EXPECT_NEAR(scalar.tail.value, exact, 3.0 * std::sqrt(exact * (1.0 - exact) / 40000));

    const TailCheck zero = trace_concentration_tail_check(Matrix::Zero(3, 3), SampleShape::from_N(10, 3), 10000, 3);
    EXPECT_EQ(zero.tail.value, 0.0);
}
