#pragma once

#include <array>

#include "hdcov/types.hpp"

namespace hdcov {

/// S = X^T X / N for N mean-zero rows.
Matrix sample_cov_known_mean(const DataMatrix& x);

struct UnknownMeanCovariance {
    Matrix s_star;  ///< centered at the sample mean, divided by n
    Matrix s;       ///< (n / N) * s_star with N = n - 1
};

UnknownMeanCovariance sample_cov_unknown_mean(const DataMatrix& x);

/// Test statistic from a sample covariance and effective sample size N.
double statistic(TestKind kind, const Matrix& s, int N);

/// Statistic of known-mean data: statistic(kind, X^T X / N, N) with N = rows.
double statistic_of_data(TestKind kind, const DataMatrix& x);

/// Gradient of X -> statistic_of_data(kind, X), as an N x p matrix.
Matrix gradient(TestKind kind, const DataMatrix& x);

inline constexpr Eigen::Index kMaxHessianSize = 4096;

/// Hessian in row-major index order: entry (i*p + j, i'*p + j') is the
/// second derivative with respect to X_ij and X_i'j'.
Matrix hessian(TestKind kind, const DataMatrix& x);

/// An entry (i, j) of the data matrix.
struct EntryIndex {
    int i = 0;
    int j = 0;
};

/// Third derivative of the Nagao statistic; linear in X.
double nagao_third_derivative(const DataMatrix& x, const std::array<EntryIndex, 3>& idx);

/// Fourth derivative of the Nagao statistic; depends on X only through N.
double nagao_fourth_derivative(int N, int p, const std::array<EntryIndex, 4>& idx);

}  // namespace hdcov
