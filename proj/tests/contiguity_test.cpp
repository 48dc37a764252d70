#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "hdcov/calibration.hpp"
#include "hdcov/contiguity.hpp"
#include "hdcov/model.hpp"
#include "hdcov/power.hpp"
#include "hdcov/rng.hpp"
#include "hdcov/statistics.hpp"

using namespace hdcov;

namespace {

Matrix spiked(int p, std::vector<double> a) {
    a.resize(p, 0.0);
    return build_covariance(CovarianceSpec::spiked(a));
}

Matrix normal(int rows, int cols, std::uint64_t seed) {
    RandomStream s(seed, StreamPurpose::Verification, 0);
    return standard_normal_matrix(rows, cols, s);
}

Matrix random_pd(int p, std::uint64_t seed) {
    const Matrix g = normal(p, 2 * p, seed);
    return g * g.transpose() / (2.0 * p) + 0.3 * Matrix::Identity(p, p);
}

}  // namespace

TEST(Tmap, LrtAtIdentityIsGradient) {
    const Matrix z = normal(10, 4, 1);
    const Matrix s = z.transpose() * z / 10.0;
    const Matrix expected = z * (Matrix::Identity(4, 4) - s.inverse());
    EXPECT_LE((tmap(TestKind::LrtIdentity, Matrix::Identity(4, 4), Vector::Zero(4), z) - expected).norm(), 1e-10);
}

TEST(Tmap, LrtGeneralSigma) {
    const Matrix z = normal(10, 4, 2);
    const Matrix sigma = random_pd(4, 3);
    const Matrix s = z.transpose() * z / 10.0;
    const Matrix expected = z * (sigma - s.inverse());
    EXPECT_LE((tmap(TestKind::LrtIdentity, sigma, Vector::Zero(4), z) - expected).norm(), 1e-9 * expected.norm());
}

TEST(Tmap, ChainRuleFiniteDifferences) {
    const int N = 6, p = 3;
    const Matrix sigma = random_pd(p, 4);
    const Matrix root = sym_sqrt(sigma);
    for (TestKind kind : kAllTestKinds) {
        Matrix z = normal(N, p, 5);
        const Matrix t = tmap(kind, sigma, Vector::Zero(p), z);
        Matrix fd(N, p);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < p; ++j) {
                const double v = z(i, j), h = std::cbrt(2.2e-16) * (1.0 + std::abs(v));
                z(i, j) = v + h;
                const double up = statistic_of_data(kind, z * root);
                z(i, j) = v - h;
                const double down = statistic_of_data(kind, z * root);
                z(i, j) = v;
                fd(i, j) = (up - down) / (2.0 * h);
            }
        EXPECT_LE((t - fd).norm() / std::max(1.0, fd.norm()), 1e-5) << to_string(kind);
    }
}

TEST(Tmap, NonzeroMeanShiftsData) {
    const Matrix z = normal(8, 3, 6);
    const Vector mu = Vector::Constant(3, 2.0);
    const Matrix shifted = z.rowwise() + mu.transpose();
    EXPECT_LE((tmap(TestKind::NagaoLedoitWolf, Matrix::Identity(3, 3), mu, z) -
               gradient(TestKind::NagaoLedoitWolf, shifted))
                  .norm(),
              1e-12);
}

TEST(Dispersion, ZeroAtNull) {
    const SampleShape shape = SampleShape::from_N(20, 5);
    for (TestKind kind : kAllTestKinds) {
        const McEstimate v = dispersion_mc(kind, Matrix::Identity(5, 5), shape, 100, 1);
        EXPECT_EQ(v.value, 0.0);
        EXPECT_EQ(v.std_error, 0.0);
    }
    EXPECT_EQ(dispersion_closed_lrt(Matrix::Identity(5, 5), 20), 0.0);
}

TEST(Dispersion, ClosedFormExample) {
    EXPECT_DOUBLE_EQ(dispersion_closed_lrt(spiked(2, {1.0}), 10), 10.0);
}

TEST(Dispersion, LrtMonteCarloMatchesClosedForm) {
    const SampleShape shape = SampleShape::from_N(40, 10);
    const McEstimate v = dispersion_mc(TestKind::LrtIdentity, spiked(10, {1.0}), shape, 4000, 2);
    EXPECT_NEAR(v.value, 40.0, 3.0 * v.std_error);
    for (int k = 0; k < 10; ++k) {
        const Matrix sigma = random_pd(10, 100 + k);
        const McEstimate e = dispersion_mc(TestKind::LrtIdentity, sigma, shape, 1000, 200 + k);
        EXPECT_NEAR(e.value, dispersion_closed_lrt(sigma, 40), 3.0 * e.std_error) << k;
    }
}

TEST(Dispersion, SphericityScaleFree) {
    const SampleShape shape = SampleShape::from_N(30, 6);
    const Matrix sigma = random_pd(6, 7);
    for (TestKind kind : {TestKind::LrtSphericity, TestKind::John}) {
        const McEstimate a = dispersion_mc(kind, sigma, shape, 200, 3);
        const McEstimate b = dispersion_mc(kind, 5.0 * sigma, shape, 200, 3);
        EXPECT_NEAR(a.value, b.value, 1e-9 * a.value);
    }
}

TEST(Dispersion, ReproducibleAcrossThreads) {
    const SampleShape shape = SampleShape::from_N(30, 6);
    const Matrix sigma = random_pd(6, 8);
    for (TestKind kind : kAllTestKinds) {
        const McEstimate a = dispersion_mc(kind, sigma, shape, 300, 4, 1);
        const McEstimate b = dispersion_mc(kind, sigma, shape, 300, 4, 5);
        EXPECT_EQ(a.value, b.value);
        EXPECT_EQ(a.std_error, b.std_error);
    }
}

TEST(MeanGapWithResidual, Examples) {
    const SampleShape shape = SampleShape::from_N(10, 2);
    const MeanGap lrt = mean_gap_with_residual(TestKind::LrtIdentity, random_pd(2, 9), shape);
    EXPECT_TRUE(lrt.exact);
    EXPECT_EQ(lrt.residual, 0.0);

    const MeanGap null = mean_gap_with_residual(TestKind::NagaoLedoitWolf, Matrix::Identity(2, 2), shape);
    EXPECT_EQ(null.leading, 0.0);
    EXPECT_EQ(null.residual, 0.0);

    const MeanGap na = mean_gap_with_residual(TestKind::NagaoLedoitWolf, spiked(2, {1.0}), shape);
    EXPECT_NEAR(na.residual, 0.24, 1e-14);
    EXPECT_NEAR(na.residual_gap, 10.0 / 4.0 * 0.24, 1e-14);
    EXPECT_TRUE(na.exact);
}

TEST(MeanGapWithResidual, NagaoExactGapMatchesMonteCarlo) {
    const SampleShape shape = SampleShape::from_N(30, 6);
    const Matrix sigma = random_pd(6, 10);
    const double m0 = null_mean_exact(TestKind::NagaoLedoitWolf, shape);
    const Matrix root = sym_sqrt(sigma);
    const int reps = 20000;
    std::vector<double> t(reps);
    for (int r = 0; r < reps; ++r) {
        RandomStream s(55, StreamPurpose::Verification, r);
        t[r] = statistic_of_data(TestKind::NagaoLedoitWolf, standard_normal_matrix(30, 6, s) * root);
    }
    double mean = 0.0, sq = 0.0;
    for (double v : t) mean += v / reps;
    for (double v : t) sq += (v - mean) * (v - mean) / (reps - 1);
    const MeanGap g = mean_gap_with_residual(TestKind::NagaoLedoitWolf, sigma, shape);
    EXPECT_NEAR(mean - m0, g.gap(), 4.0 * std::sqrt(sq / reps));
}

TEST(ErrBar, Definition) {
    EXPECT_EQ(err_bar(0.0, 5.0, 1.0), 0.0);
    EXPECT_EQ(err_bar(3.0, 2.0, 1.0), 1.5);
    EXPECT_EQ(err_bar(3.0, -0.5, 1.5), 2.0);
}

TEST(BoundTerms, Examples) {
    const BoundTerms zero = bound_terms(0.03, 0.0, 2.0);
    EXPECT_EQ(zero.thm21, 0.03);
    EXPECT_EQ(zero.cor22, 0.03);
    EXPECT_DOUBLE_EQ(bound_terms(0.1, 1.0, 0.0).thm21, 1.1);
    double previous = 0.0;
    for (double t = 0.0; t < 10.0; t += 0.5) {
        const double v = bound_terms(0.0, 0.2, -t).thm21;
        EXPECT_GT(v, previous);
        previous = v;
    }
}

TEST(ContiguityReport, NullIsZero) {
    const SampleShape shape = SampleShape::from_N(20, 4);
    for (TestKind kind : kAllTestKinds) {
        ContiguityOptions opt;
        opt.reps = 100;
        opt.seed = 1;
        const ContiguityReport r = contiguity_report(kind, Matrix::Identity(4, 4), shape, 2.0, opt);
        EXPECT_EQ(r.V, 0.0);
        EXPECT_EQ(r.err_bar, 0.0);
        EXPECT_EQ(r.bound_term_49, 0.0);
        EXPECT_EQ(r.bound_term_23(1.0), 0.0);
    }
}

TEST(ContiguityReport, Invariants) {
    const SampleShape shape = SampleShape::from_N(40, 8);
    const Matrix sigma = random_pd(8, 11);
    for (TestKind kind : kAllTestKinds) {
        ContiguityOptions opt;
        opt.reps = 200;
        opt.seed = 2;
        const double sigma_null = std::sqrt(null_variance_asymptotic(kind, shape));
        const ContiguityReport r = contiguity_report(kind, sigma, shape, sigma_null, opt);
        EXPECT_NEAR(r.err_bar, r.V / std::max(std::abs(r.mean_gap), r.sigma_null), 1e-15);
        EXPECT_NEAR(r.bound_term_49, std::pow(r.err_bar, 4.0 / 9.0), 1e-15);
        EXPECT_NEAR(r.bound_term_23(-1.5), std::pow(2.5 * r.err_bar, 2.0 / 3.0), 1e-14);
        EXPECT_GE(r.residual_bound, 0.0);
    }
}

TEST(ContiguityReport, SphericityErrBarScaleInvariant) {
    const SampleShape shape = SampleShape::from_N(40, 8);
    const Matrix sigma = random_pd(8, 12);
    for (TestKind kind : {TestKind::LrtSphericity, TestKind::John}) {
        ContiguityOptions opt;
        opt.reps = 200;
        opt.seed = 3;
        const double sigma_null = std::sqrt(null_variance_asymptotic(kind, shape));
        const double a = contiguity_report(kind, sigma, shape, sigma_null, opt).err_bar;
        const double b = contiguity_report(kind, 9.0 * sigma, shape, sigma_null, opt).err_bar;
        EXPECT_NEAR(a, b, 1e-9 * a);
    }
}

TEST(ContiguityReport, LrtErrBarDecaysInP) {
    std::vector<double> lp, le;
    for (int p : {20, 40, 80, 160}) {
        const SampleShape shape = SampleShape::from_N(2 * p, p);
        const Matrix sigma = spiked(p, {1.0});
        ContiguityOptions opt;
        const ContiguityReport r =
            contiguity_report(TestKind::LrtIdentity, sigma, shape, std::sqrt(null_variance_asymptotic(TestKind::LrtIdentity, shape)), opt);
        EXPECT_TRUE(r.V_closed_form);
        lp.push_back(std::log(p));
        le.push_back(std::log(r.err_bar));
    }
    const double mx = (lp[0] + lp[1] + lp[2] + lp[3]) / 4.0, my = (le[0] + le[1] + le[2] + le[3]) / 4.0;
    double sxy = 0.0, sxx = 0.0;
    for (int k = 0; k < 4; ++k) sxy += (lp[k] - mx) * (le[k] - my), sxx += (lp[k] - mx) * (lp[k] - mx);
    EXPECT_LE(sxy / sxx, -0.4);
}
