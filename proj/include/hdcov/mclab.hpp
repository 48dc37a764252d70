#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "hdcov/calibration.hpp"
#include "hdcov/estimate.hpp"
#include "hdcov/types.hpp"

namespace hdcov {

/// `rows` observations Z Sigma^{1/2} + mu^T (mu may be empty for zero mean).
DataMatrix gaussian_sample(const Matrix& sigma, const Vector& mu, int rows, std::uint64_t seed);

/// Rejection rate of the calibrated test over `reps` datasets of N = n - 1
/// known-mean rows drawn under Sigma; binomial standard error.
McEstimate empirical_power(TestKind kind, const Matrix& sigma, const SampleShape& shape, double alpha,
                           const NullCalibration& calib, int reps, std::uint64_t seed,
                           std::optional<int> threads = std::nullopt);

/// Mean of the statistic over `reps` known-mean datasets drawn under Sigma.
McEstimate statistic_mean_mc(TestKind kind, const Matrix& sigma, const SampleShape& shape, int reps,
                             std::uint64_t seed, std::optional<int> threads = std::nullopt);

/// sup_t |F_n(t) - Phi(t)| evaluated exactly at the order statistics.
double kolmogorov_distance_normal(std::span<const double> values);

struct CltCheck {
    double d_kol = 0.0;
    NullCalibration calibration;
    int reps = 0;
};

/// Kolmogorov distance between standardized null statistics and N(0, 1).
/// The standardization comes from a calibration run on a disjoint stream.
CltCheck null_clt_check(TestKind kind, const SampleShape& shape, int reps, std::uint64_t seed,
                        std::optional<int> calibration_reps = std::nullopt,
                        std::optional<int> threads = std::nullopt);

enum class WishartMoment { TrS2, Tr2S, TrS3, Tr3S, TrSTrS2, Tr2S2, TrSTrS3 };

inline constexpr std::array<WishartMoment, 7> kAllWishartMoments = {
    WishartMoment::TrS2,    WishartMoment::Tr2S,  WishartMoment::TrS3,    WishartMoment::Tr3S,
    WishartMoment::TrSTrS2, WishartMoment::Tr2S2, WishartMoment::TrSTrS3};

/// E_tr_S2, E_tr2_S, E_tr_S3, E_tr3_S, E_trS_trS2, E_tr2_S2, E_trS_trS3.
std::string_view to_string(WishartMoment moment);
WishartMoment parse_wishart_moment(std::string_view name);

/// True for the two moments with closed forms under a general Sigma.
bool wishart_moment_general_sigma(WishartMoment moment);

/// Exact closed form of the moment of S = Sigma^{1/2} S_Z Sigma^{1/2} with
/// S_Z = Z^T Z / N. The third- and fourth-order moments need Sigma = I.
double wishart_trace_oracle(WishartMoment moment, const Matrix& sigma, const SampleShape& shape);
double wishart_trace_oracle(std::string_view name, const Matrix& sigma, const SampleShape& shape);

/// The seven trace functionals of one matrix, in kAllWishartMoments order.
std::array<double, 7> wishart_trace_functionals(const Matrix& s);

/// Monte Carlo means of all seven functionals from shared draws.
std::array<McEstimate, 7> wishart_trace_mc(const Matrix& sigma, const SampleShape& shape, int reps,
                                           std::uint64_t seed, std::optional<int> threads = std::nullopt);

/// E ||S_Z^-1||_op^q. Needs p / N <= 0.9 and 0 < q <= (N - p - 1) / 8.
McEstimate inverse_opnorm_moment_mc(const SampleShape& shape, double q, int reps, std::uint64_t seed,
                                    std::optional<int> threads = std::nullopt);

struct LambdaMatrix {
    int N = 0;
    int p = 0;
    /// (N p) x (N p), row-major index order (i outer, j inner).
    Matrix entries;
};

enum class USign { Inverse, Plus };

inline constexpr Eigen::Index kMaxLambdaSize = 2048;

/// Inverse: N^-1 X_i^T S^-l X_i' (S^-m)_jj'. Plus: N^-1 X_i^T S^l X_i' (S^m)_jj'.
LambdaMatrix u_matrix(int l, int m, USign sign, const DataMatrix& x);

/// Spectral norm of a symmetric matrix.
double symmetric_opnorm(const Matrix& m);

struct FourthMomentCheck {
    McEstimate lhs;
    double rhs = 0.0;
    bool holds = false;
};

/// E ||Z A||_F^4 against 4 N ||A^T A||_F^2 + N^2 ||A||_F^4.
FourthMomentCheck fourth_moment_bound_check(const Matrix& a, int N, int reps, std::uint64_t seed,
                                            std::optional<int> threads = std::nullopt);

struct TailCheck {
    McEstimate tail;
    double bound = 0.0;
    bool holds = false;
};

/// Empirical P(tr(Sigma S_Z) < tr(Sigma) / 2) against exp(-N / 20).
TailCheck trace_concentration_tail_check(const Matrix& sigma, const SampleShape& shape, int reps,
                                         std::uint64_t seed, std::optional<int> threads = std::nullopt);

}  // namespace hdcov
