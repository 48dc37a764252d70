#include "hdcov/contiguity.hpp"

#include <cmath>

#include "hdcov/error.hpp"
#include "hdcov/model.hpp"
#include "hdcov/parallel.hpp"
#include "hdcov/power.hpp"
#include "hdcov/rng.hpp"
#include "hdcov/statistics.hpp"

namespace hdcov {

Matrix tmap_with_root(TestKind kind, const Matrix& sigma_root, const Matrix& z) {
    if (z.cols() != sigma_root.rows()) fail(ErrorCode::BadDimension, "Z and Sigma dimensions differ");
    return gradient(kind, z * sigma_root) * sigma_root;
}

Matrix tmap(TestKind kind, const Matrix& sigma, const Vector& mu, const Matrix& z) {
    if (z.cols() != sigma.rows() || (mu.size() != 0 && mu.size() != sigma.rows())) {
        fail(ErrorCode::BadDimension, "Z, Sigma and mu dimensions differ");
    }
    const Matrix root = sym_sqrt(sigma);
    Matrix x = z * root;
    if (mu.size() != 0) x.rowwise() += mu.transpose();
    return gradient(kind, x) * root;
}

McEstimate dispersion_mc(TestKind kind, const Matrix& sigma, const SampleShape& shape, int reps,
                         std::uint64_t seed, std::optional<int> threads) {
    require_nondegenerate(kind, shape);
    if (sigma.rows() != shape.p || sigma.cols() != shape.p) fail(ErrorCode::BadDimension, "Sigma does not match p");
    if (reps < 100) fail(ErrorCode::BadArgument, "dispersion needs reps >= 100");
    const Matrix root = sym_sqrt(sigma);
    const int N = shape.N();
    const auto values = run_replicates<double>(static_cast<std::size_t>(reps), resolve_threads(threads),
                                               [&](std::size_t r) {
                                                   RandomStream stream(seed, StreamPurpose::Dispersion, r);
                                                   const Matrix z = standard_normal_matrix(N, shape.p, stream);
                                                   return (tmap_with_root(kind, root, z) - gradient(kind, z))
                                                       .squaredNorm();
                                               });
    return estimate_from_samples(values, seed);
}

double dispersion_closed_lrt(const Matrix& sigma, int N) {
    if (sigma.rows() != sigma.cols()) fail(ErrorCode::BadDimension, "Sigma must be square");
    return static_cast<double>(N) * (sigma - Matrix::Identity(sigma.rows(), sigma.cols())).squaredNorm();
}

MeanGap mean_gap_with_residual(TestKind kind, const Matrix& sigma, const SampleShape& shape) {
    MeanGap out;
    out.leading = mean_gap_leading(kind, sigma, shape);
    const double n = shape.N();
    const double p = shape.p;
    const Matrix id = Matrix::Identity(shape.p, shape.p);
    switch (kind) {
        case TestKind::LrtIdentity:
            out.exact = true;
            break;
        case TestKind::NagaoLedoitWolf:
            out.residual = (1.0 / n - 2.0 / (n * n)) * (sigma * sigma - id).trace();
            out.residual_gap = 0.25 * n * out.residual;
            out.exact = true;
            break;
        case TestKind::LrtSphericity: {
            const Matrix m = normalize_sphericity(sigma);
            out.residual = m.squaredNorm() / p / n;
            out.residual_gap = 0.5 * n * out.residual;
            break;
        }
        case TestKind::John: {
            const Matrix m = normalize_sphericity(sigma);
            out.residual = (m.squaredNorm() / p + 1.0) * (m - id).norm() / std::sqrt(n);
            out.residual_gap = 0.25 * n * out.residual;
            break;
        }
    }
    return out;
}

double err_bar(double V, double mean_gap, double sigma_null) {
    if (!(sigma_null > 0.0)) fail(ErrorCode::BadArgument, "sigma_null must be positive");
    if (V < 0.0) fail(ErrorCode::BadArgument, "V must be nonnegative");
    return V / std::max(std::abs(mean_gap), sigma_null);
}

BoundTerms bound_terms(double err_null, double err_bar_value, double t) {
    if (err_null < 0.0 || err_bar_value < 0.0) fail(ErrorCode::BadArgument, "bound inputs must be nonnegative");
    return {err_null + std::pow((1.0 + std::abs(t)) * err_bar_value, 2.0 / 3.0),
            err_null + std::pow(err_bar_value, 4.0 / 9.0)};
}

double ContiguityReport::bound_term_23(double t) const {
    return std::pow((1.0 + std::abs(t)) * err_bar, 2.0 / 3.0);
}

ContiguityReport contiguity_report(TestKind kind, const Matrix& sigma, const SampleShape& shape, double sigma_null,
                                   const ContiguityOptions& options) {
    ContiguityReport out;
    out.kind = kind;
    out.sigma_null = sigma_null;
    const MeanGap gap = mean_gap_with_residual(kind, sigma, shape);
    out.mean_gap = gap.gap();
    out.residual_bound = gap.exact ? 0.0 : std::abs(gap.residual_gap);
    if (kind == TestKind::LrtIdentity && options.lrt_closed_form) {
        require_nondegenerate(kind, shape);
        out.V = std::sqrt(dispersion_closed_lrt(sigma, shape.N()));
        out.V_closed_form = true;
    } else {
        const McEstimate v2 = dispersion_mc(kind, sigma, shape, options.reps, options.seed, options.threads);
        out.V = std::sqrt(std::max(v2.value, 0.0));
        // Delta method: se(sqrt(x)) = se(x) / (2 sqrt(x)).
        out.V_std_error = out.V > 0.0 ? v2.std_error / (2.0 * out.V) : 0.0;
    }
    out.err_bar = err_bar(out.V, out.mean_gap, sigma_null);
    out.bound_term_49 = std::pow(out.err_bar, 4.0 / 9.0);
    return out;
}

}  // namespace hdcov
