#include "hdcov/mclab.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "hdcov/distributions.hpp"
#include "hdcov/error.hpp"
#include "hdcov/model.hpp"
#include "hdcov/parallel.hpp"
#include "hdcov/rng.hpp"
#include "hdcov/statistics.hpp"

namespace hdcov {

namespace {

/// Multiplies by a square root, using a column scaling when it is diagonal.
class RootApplier {
public:
    explicit RootApplier(const Matrix& sigma) : root_(sym_sqrt(sigma)), diagonal_(root_.isDiagonal(0.0)) {}

    Matrix apply(const Matrix& z) const {
        if (diagonal_) return z * root_.diagonal().asDiagonal();
        return z * root_;
    }

private:
    Matrix root_;
    bool diagonal_;
};

McEstimate binomial_estimate(const std::vector<double>& hits, std::uint64_t seed) {
    McEstimate out;
    out.reps = static_cast<int>(hits.size());
    out.value = pairwise_sum(hits) / static_cast<double>(hits.size());
    out.std_error = std::sqrt(out.value * (1.0 - out.value) / static_cast<double>(hits.size()));
    out.seed = seed;
    return out;
}

/// Symmetric matrix power through the eigendecomposition.
Matrix symmetric_power(const Eigen::SelfAdjointEigenSolver<Matrix>& eig, double exponent) {
    const Vector powered = eig.eigenvalues().array().pow(exponent).matrix();
    Matrix out = eig.eigenvectors() * powered.asDiagonal() * eig.eigenvectors().transpose();
    return 0.5 * (out + out.transpose());
}

}  // namespace

DataMatrix gaussian_sample(const Matrix& sigma, const Vector& mu, int rows, std::uint64_t seed) {
    if (rows < 1) fail(ErrorCode::BadDimension, "need at least one row");
    if (mu.size() != 0 && mu.size() != sigma.rows()) fail(ErrorCode::BadDimension, "mu does not match Sigma");
    RootApplier root(sigma);
    RandomStream stream(seed, StreamPurpose::Sample, 0);
    DataMatrix x = root.apply(standard_normal_matrix(rows, sigma.rows(), stream));
    if (mu.size() != 0) x.rowwise() += mu.transpose();
    return x;
}

McEstimate empirical_power(TestKind kind, const Matrix& sigma, const SampleShape& shape, double alpha,
                           const NullCalibration& calib, int reps, std::uint64_t seed, std::optional<int> threads) {
    require_nondegenerate(kind, shape);
    if (calib.kind != kind || !(calib.shape() == shape)) {
        fail(ErrorCode::BadArgument, "calibration does not match the test and shape");
    }
    if (sigma.rows() != shape.p) fail(ErrorCode::BadDimension, "Sigma does not match p");
    if (reps < 1) fail(ErrorCode::BadArgument, "reps must be positive");
    upper_critical_value(alpha);
    RootApplier root(sigma);
    const int N = shape.N();
    const auto hits = run_replicates<double>(static_cast<std::size_t>(reps), resolve_threads(threads),
                                             [&](std::size_t r) {
                                                 RandomStream stream(seed, StreamPurpose::Alternative, r);
                                                 const Matrix x = root.apply(standard_normal_matrix(N, shape.p, stream));
                                                 const double t = statistic_of_data(kind, x);
                                                 return decide_statistic(t, calib, alpha).reject ? 1.0 : 0.0;
                                             });
    return binomial_estimate(hits, seed);
}

McEstimate statistic_mean_mc(TestKind kind, const Matrix& sigma, const SampleShape& shape, int reps,
                             std::uint64_t seed, std::optional<int> threads) {
    require_nondegenerate(kind, shape);
    if (sigma.rows() != shape.p) fail(ErrorCode::BadDimension, "Sigma does not match p");
    if (reps < 2) fail(ErrorCode::BadArgument, "reps must be at least 2");
    RootApplier root(sigma);
    const int N = shape.N();
    const auto values = run_replicates<double>(static_cast<std::size_t>(reps), resolve_threads(threads),
                                               [&](std::size_t r) {
                                                   RandomStream stream(seed, StreamPurpose::Alternative, r);
                                                   const Matrix x = root.apply(standard_normal_matrix(N, shape.p, stream));
                                                   return statistic_of_data(kind, x);
                                               });
    return estimate_from_samples(values, seed);
}

double kolmogorov_distance_normal(std::span<const double> values) {
    if (values.empty()) fail(ErrorCode::BadArgument, "Kolmogorov distance needs a nonempty sample");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        const double f = normal_cdf(sorted[k]);
        d = std::max({d, static_cast<double>(k + 1) / n - f, f - static_cast<double>(k) / n});
    }
    return d;
}

CltCheck null_clt_check(TestKind kind, const SampleShape& shape, int reps, std::uint64_t seed,
                        std::optional<int> calibration_reps, std::optional<int> threads) {
    require_nondegenerate(kind, shape);
    if (reps < 1000) fail(ErrorCode::BadArgument, "CLT check needs reps >= 1000");
    CltCheck out;
    out.reps = reps;
    out.calibration = null_calibrate_mc(kind, shape, calibration_reps.value_or(reps),
                                        derive_seed(seed, static_cast<std::uint64_t>(StreamPurpose::CltCalibration)),
                                        threads);
    const int N = shape.N();
    const auto z = run_replicates<double>(static_cast<std::size_t>(reps), resolve_threads(threads),
                                          [&](std::size_t r) {
                                              RandomStream stream(seed, StreamPurpose::CltEvaluation, r);
                                              const Matrix x = standard_normal_matrix(N, shape.p, stream);
                                              return (statistic_of_data(kind, x) - out.calibration.m) /
                                                     out.calibration.sigma;
                                          });
    out.d_kol = kolmogorov_distance_normal(z);
    return out;
}

std::string_view to_string(WishartMoment moment) {
    switch (moment) {
        case WishartMoment::TrS2: return "E_tr_S2";
        case WishartMoment::Tr2S: return "E_tr2_S";
        case WishartMoment::TrS3: return "E_tr_S3";
        case WishartMoment::Tr3S: return "E_tr3_S";
        case WishartMoment::TrSTrS2: return "E_trS_trS2";
        case WishartMoment::Tr2S2: return "E_tr2_S2";
        case WishartMoment::TrSTrS3: return "E_trS_trS3";
    }
    return "unknown";
}

WishartMoment parse_wishart_moment(std::string_view name) {
    for (WishartMoment m : kAllWishartMoments)
        if (to_string(m) == name) return m;
    fail(ErrorCode::UnknownMoment, "unknown moment '" + std::string(name) + "'");
}

bool wishart_moment_general_sigma(WishartMoment moment) {
    return moment == WishartMoment::TrS2 || moment == WishartMoment::Tr2S;
}

double wishart_trace_oracle(WishartMoment moment, const Matrix& sigma, const SampleShape& shape) {
    shape.validate();
    if (sigma.rows() != shape.p || sigma.cols() != shape.p) fail(ErrorCode::BadDimension, "Sigma does not match p");
    const double n = shape.N();
    const double p = shape.p;
    const double y = p / n;
    if (wishart_moment_general_sigma(moment)) {
        const double tr = sigma.trace();
        const double tr2 = (sigma * sigma).trace();
        if (moment == WishartMoment::TrS2) return (1.0 + 1.0 / n) * tr2 + tr * tr / n;
        return tr * tr + 2.0 * tr2 / n;
    }
    if (!sigma.isIdentity(1e-14)) {
        fail(ErrorCode::Unsupported, std::string(to_string(moment)) + " is only available for Sigma = I");
    }
    const double n1 = n * (n - 1.0);
    const double n2 = n1 * (n - 2.0);
    const double n3 = n2 * (n - 3.0);
    const double p2 = p * (p + 2.0);
    const double p24 = p2 * (p + 4.0);
    const double p246 = p24 * (p + 6.0);
    switch (moment) {
        case WishartMoment::TrS3:
            return p * y * y + 3.0 * p * y + p + 3.0 * y * y + 3.0 * y + 4.0 * y / n;
        case WishartMoment::Tr3S:
            return p * p * p + 6.0 * p * y + 8.0 * y / n;
        case WishartMoment::TrSTrS2:
            return p * p * y + p * p + p * y + 4.0 * (y * y + y) + 4.0 * y / n;
        case WishartMoment::Tr2S2:
            return (n * p246 + n1 * p2 * p2 + 2.0 * n1 * 3.0 * p2 + 4.0 * n1 * p24 + 4.0 * n2 * p2 +
                    2.0 * n2 * p * p2 + n3 * p * p) /
                   (n * n * n * n);
        case WishartMoment::TrSTrS3:
            return (n * p246 + n1 * p * p24 + 3.0 * n1 * p2 * (p + 2.0) + 3.0 * n1 * p24 + 3.0 * n2 * p2 +
                    3.0 * n2 * p * p2 + n3 * p * p) /
                   (n * n * n * n);
        default:
            break;
    }
    fail(ErrorCode::UnknownMoment, "unknown moment");
}

double wishart_trace_oracle(std::string_view name, const Matrix& sigma, const SampleShape& shape) {
    return wishart_trace_oracle(parse_wishart_moment(name), sigma, shape);
}

std::array<double, 7> wishart_trace_functionals(const Matrix& s) {
    const Matrix s2 = s * s;
    const double t1 = s.trace();
    const double t2 = s2.trace();
    const double t3 = s2.cwiseProduct(s).sum();
    return {t2, t1 * t1, t3, t1 * t1 * t1, t1 * t2, t2 * t2, t1 * t3};
}

std::array<McEstimate, 7> wishart_trace_mc(const Matrix& sigma, const SampleShape& shape, int reps,
                                           std::uint64_t seed, std::optional<int> threads) {
    shape.validate();
    if (sigma.rows() != shape.p) fail(ErrorCode::BadDimension, "Sigma does not match p");
    if (reps < 2) fail(ErrorCode::BadArgument, "reps must be at least 2");
    RootApplier root(sigma);
    const int N = shape.N();
    const auto draws = run_replicates<std::array<double, 7>>(
        static_cast<std::size_t>(reps), resolve_threads(threads), [&](std::size_t r) {
            RandomStream stream(seed, StreamPurpose::WishartMoments, r);
            const Matrix x = root.apply(standard_normal_matrix(N, shape.p, stream));
            return wishart_trace_functionals(sample_cov_known_mean(x));
        });
    std::array<McEstimate, 7> out;
    std::vector<double> column(draws.size());
    for (std::size_t k = 0; k < 7; ++k) {
        for (std::size_t r = 0; r < draws.size(); ++r) column[r] = draws[r][k];
        out[k] = estimate_from_samples(column, seed);
    }
    return out;
}

McEstimate inverse_opnorm_moment_mc(const SampleShape& shape, double q, int reps, std::uint64_t seed,
                                    std::optional<int> threads) {
    shape.validate();
    const double n = shape.N();
    if (static_cast<double>(shape.p) / n > 0.9) {
        fail(ErrorCode::RatioTooLarge, "inverse moments need p / N <= 0.9");
    }
    if (!(q > 0.0) || q > (n - shape.p - 1.0) / 8.0) {
        fail(ErrorCode::RatioTooLarge, "moment order q must lie in (0, (N - p - 1) / 8]");
    }
    if (reps < 2) fail(ErrorCode::BadArgument, "reps must be at least 2");
    const auto values = run_replicates<double>(static_cast<std::size_t>(reps), resolve_threads(threads),
                                               [&](std::size_t r) {
                                                   RandomStream stream(seed, StreamPurpose::InverseMoment, r);
                                                   const Matrix z = standard_normal_matrix(shape.N(), shape.p, stream);
                                                   Eigen::SelfAdjointEigenSolver<Matrix> eig(
                                                       sample_cov_known_mean(z), Eigen::EigenvaluesOnly);
                                                   return std::pow(eig.eigenvalues()(0), -q);
                                               });
    return estimate_from_samples(values, seed);
}

LambdaMatrix u_matrix(int l, int m, USign sign, const DataMatrix& x) {
    const Eigen::Index N = x.rows();
    const Eigen::Index p = x.cols();
    if (l < 0 || m < 0) fail(ErrorCode::BadArgument, "U-matrix exponents must be nonnegative");
    if (N * p > kMaxLambdaSize) {
        fail(ErrorCode::TooLarge, "N*p = " + std::to_string(N * p) + " exceeds " + std::to_string(kMaxLambdaSize));
    }
    const Matrix s = sample_cov_known_mean(x);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
    double direction = 1.0;
    if (sign == USign::Inverse) {
        if (!(eig.eigenvalues()(0) > 0.0)) fail(ErrorCode::DegenerateStatistic, "inverse U-matrix needs S nonsingular");
        direction = -1.0;
    }
    const Matrix left = x * symmetric_power(eig, direction * l) * x.transpose() / static_cast<double>(N);
    const Matrix right = symmetric_power(eig, direction * m);
    LambdaMatrix out{static_cast<int>(N), static_cast<int>(p), Matrix(N * p, N * p)};
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index k = 0; k < N; ++k) out.entries.block(i * p, k * p, p, p) = left(i, k) * right;
    return out;
}

double symmetric_opnorm(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return eig.eigenvalues().cwiseAbs().maxCoeff();
}

FourthMomentCheck fourth_moment_bound_check(const Matrix& a, int N, int reps, std::uint64_t seed,
                                            std::optional<int> threads) {
    if (reps < 1000) fail(ErrorCode::BadArgument, "fourth-moment check needs reps >= 1000");
    if (N < 1 || a.rows() < 1) fail(ErrorCode::BadDimension, "N and A must be nonempty");
    const auto values = run_replicates<double>(static_cast<std::size_t>(reps), resolve_threads(threads),
                                               [&](std::size_t r) {
                                                   RandomStream stream(seed, StreamPurpose::FourthMoment, r);
                                                   const Matrix z = standard_normal_matrix(N, a.rows(), stream);
                                                   const double f = (z * a).squaredNorm();
                                                   return f * f;
                                               });
    FourthMomentCheck out;
    out.lhs = estimate_from_samples(values, seed);
    const double n = N;
    const double fa = a.squaredNorm();
    out.rhs = 4.0 * n * (a.transpose() * a).squaredNorm() + n * n * fa * fa;
    out.holds = out.lhs.value <= out.rhs + 3.0 * out.lhs.std_error;
    return out;
}

TailCheck trace_concentration_tail_check(const Matrix& sigma, const SampleShape& shape, int reps,
                                         std::uint64_t seed, std::optional<int> threads) {
    shape.validate();
    if (sigma.rows() != shape.p) fail(ErrorCode::BadDimension, "Sigma does not match p");
    if (reps < 10000) fail(ErrorCode::BadArgument, "tail check needs reps >= 10000");
    RootApplier root(sigma);
    const double half = 0.5 * sigma.trace();
    const int N = shape.N();
    const auto hits = run_replicates<double>(static_cast<std::size_t>(reps), resolve_threads(threads),
                                             [&](std::size_t r) {
                                                 RandomStream stream(seed, StreamPurpose::TraceTail, r);
                                                 const Matrix z = standard_normal_matrix(N, shape.p, stream);
                                                 const double tr = root.apply(z).squaredNorm() / N;
                                                 return tr < half ? 1.0 : 0.0;
                                             });
    TailCheck out;
    out.tail = binomial_estimate(hits, seed);
    out.bound = std::exp(-static_cast<double>(N) / 20.0);
    out.holds = out.tail.value <= out.bound + 3.0 * out.tail.std_error;
    return out;
}

}  // namespace hdcov
