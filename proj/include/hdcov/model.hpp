#pragma once

#include <variant>
#include <vector>

#include "hdcov/types.hpp"

namespace hdcov {

/// Declarative description of a covariance matrix.
struct CovarianceSpec {
    struct Identity {};
    struct ScaledIdentity {
        double lambda = 1.0;
    };
    struct Diagonal {
        std::vector<double> eigenvalues;
    };
    /// Realizes diag(1 + a_1, ..., 1 + a_p).
    struct Spiked {
        std::vector<double> a;
    };
    struct Dense {
        Matrix entries;
    };
    using Kind = std::variant<Identity, ScaledIdentity, Diagonal, Spiked, Dense>;

    Kind kind = Identity{};
    int p = 0;

    static CovarianceSpec identity(int p);
    static CovarianceSpec scaled_identity(int p, double lambda);
    static CovarianceSpec diagonal(std::vector<double> eigenvalues);
    static CovarianceSpec spiked(std::vector<double> a);
    /// Spiked spec of dimension p whose leading entries are `leading`.
    static CovarianceSpec spiked(int p, const std::vector<double>& leading);
    static CovarianceSpec dense(Matrix entries);
};

inline constexpr double kPsdTolerance = 1e-12;
inline constexpr double kAsymmetryTolerance = 1e-8;

/// Dense realization. Dense input is symmetrized; eigenvalues in
/// [-tol * lambda_max, 0) are clipped to zero.
Matrix build_covariance(const CovarianceSpec& spec);

/// Throws NotPSD unless `m` is square, symmetric up to roundoff and PSD
/// within the clipping tolerance. Returns the clipped symmetric matrix.
Matrix require_psd(const Matrix& m);

/// tr(S1 S2^-1) - log det(S1 S2^-1) - p; +inf when S1 is singular.
double stein_loss(const Matrix& sigma1, const Matrix& sigma2);

/// b_l(M) = tr(M^l) / p.
double trace_power_mean(const Matrix& m, int l);

/// Same value by repeated multiplication; used as a cross-check.
double trace_power_mean_direct(const Matrix& m, int l);

/// Sigma / b(Sigma).
Matrix normalize_sphericity(const Matrix& sigma);

/// Symmetric PSD square root through the eigendecomposition.
Matrix sym_sqrt(const Matrix& sigma);

}  // namespace hdcov
