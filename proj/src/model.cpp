#include "hdcov/model.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "hdcov/error.hpp"

namespace hdcov {

namespace {

Matrix symmetrize_checked(const Matrix& m) {
    if (m.rows() != m.cols()) fail(ErrorCode::BadDimension, "covariance matrix must be square");
    const double scale = m.norm();
    if ((m - m.transpose()).norm() > kAsymmetryTolerance * scale) {
        fail(ErrorCode::NotPSD, "covariance matrix is not symmetric");
    }
    return 0.5 * (m + m.transpose());
}

}  // namespace

CovarianceSpec CovarianceSpec::identity(int p) { return {Identity{}, p}; }

CovarianceSpec CovarianceSpec::scaled_identity(int p, double lambda) {
    return {ScaledIdentity{lambda}, p};
}

CovarianceSpec CovarianceSpec::diagonal(std::vector<double> eigenvalues) {
    const int p = static_cast<int>(eigenvalues.size());
    return {Diagonal{std::move(eigenvalues)}, p};
}

CovarianceSpec CovarianceSpec::spiked(std::vector<double> a) {
    const int p = static_cast<int>(a.size());
    return {Spiked{std::move(a)}, p};
}

CovarianceSpec CovarianceSpec::spiked(int p, const std::vector<double>& leading) {
    std::vector<double> a(static_cast<std::size_t>(std::max(p, 0)), 0.0);
    for (std::size_t i = 0; i < leading.size() && i < a.size(); ++i) a[i] = leading[i];
    if (leading.size() > a.size()) fail(ErrorCode::BadDimension, "more spikes than dimensions");
    return {Spiked{std::move(a)}, p};
}

CovarianceSpec CovarianceSpec::dense(Matrix entries) {
    const int p = static_cast<int>(entries.rows());
    return {Dense{std::move(entries)}, p};
}

Matrix require_psd(const Matrix& m) {
    Matrix sym = symmetrize_checked(m);
    if (sym.size() == 0) return sym;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    const Vector& values = eig.eigenvalues();
    const double lambda_max = std::max(values.maxCoeff(), 0.0);
    const double lambda_min = values.minCoeff();
    if (lambda_min < -kPsdTolerance * lambda_max || (lambda_max == 0.0 && lambda_min < 0.0)) {
        fail(ErrorCode::NotPSD, "matrix has eigenvalue " + std::to_string(lambda_min) +
                                    " below tolerance (largest " + std::to_string(lambda_max) + ")");
    }
    if (lambda_min < 0.0) {
        const Vector clipped = values.cwiseMax(0.0);
        sym = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
        sym = 0.5 * (sym + sym.transpose()).eval();
    }
    return sym;
}

Matrix build_covariance(const CovarianceSpec& spec) {
    const int p = spec.p;
    if (p < 1) fail(ErrorCode::BadDimension, "p must be positive");
    struct Visitor {
        int p;
        Matrix operator()(const CovarianceSpec::Identity&) const { return Matrix::Identity(p, p); }
        Matrix operator()(const CovarianceSpec::ScaledIdentity& s) const {
            if (!(s.lambda > 0.0) || !std::isfinite(s.lambda)) {
                fail(ErrorCode::NotPSD, "scaled_identity needs lambda > 0");
            }
            return s.lambda * Matrix::Identity(p, p);
        }
        Matrix operator()(const CovarianceSpec::Diagonal& d) const {
            if (static_cast<int>(d.eigenvalues.size()) != p) {
                fail(ErrorCode::BadDimension, "diagonal has " + std::to_string(d.eigenvalues.size()) +
                                                  " entries for p=" + std::to_string(p));
            }
            Vector v = Eigen::Map<const Vector>(d.eigenvalues.data(), p);
            if (!v.allFinite() || (v.array() < 0.0).any()) {
                fail(ErrorCode::NotPSD, "diagonal entries must be finite and nonnegative");
            }
            return v.asDiagonal();
        }
        Matrix operator()(const CovarianceSpec::Spiked& s) const {
            if (static_cast<int>(s.a.size()) != p) {
                fail(ErrorCode::BadDimension, "spiked has " + std::to_string(s.a.size()) +
                                                  " entries for p=" + std::to_string(p));
            }
            Vector v(p);
            for (int j = 0; j < p; ++j) {
                if (!(s.a[j] > -1.0) || !std::isfinite(s.a[j])) {
                    fail(ErrorCode::NotPSD, "spike a_j must exceed -1");
                }
                v(j) = 1.0 + s.a[j];
            }
            return v.asDiagonal();
        }
        Matrix operator()(const CovarianceSpec::Dense& d) const {
            if (d.entries.rows() != p || d.entries.cols() != p) {
                fail(ErrorCode::BadDimension, "dense matrix is " + std::to_string(d.entries.rows()) + "x" +
                                                  std::to_string(d.entries.cols()) + " for p=" +
                                                  std::to_string(p));
            }
            if (!d.entries.allFinite()) fail(ErrorCode::NotPSD, "dense matrix has non-finite entries");
            return require_psd(d.entries);
        }
    };
    return std::visit(Visitor{p}, spec.kind);
}

double stein_loss(const Matrix& sigma1, const Matrix& sigma2) {
    if (sigma1.rows() != sigma2.rows() || sigma1.cols() != sigma2.cols() || sigma1.rows() != sigma1.cols()) {
        fail(ErrorCode::BadDimension, "stein_loss arguments must be square of equal size");
    }
    const Eigen::Index p = sigma1.rows();
    Eigen::LLT<Matrix> ref(0.5 * (sigma2 + sigma2.transpose()));
    if (ref.info() != Eigen::Success) fail(ErrorCode::InvalidReference, "reference matrix is not positive definite");
    // M = L^-1 Sigma1 L^-T shares its spectrum with Sigma1 Sigma2^-1.
    Matrix m = ref.matrixL().solve(sigma1);
    m = ref.matrixL().solve(m.transpose()).transpose();
    m = 0.5 * (m + m.transpose()).eval();
    Eigen::LLT<Matrix> chol(m);
    if (chol.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    const auto diag = chol.matrixLLT().diagonal();
    double logdet = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
        if (!(diag(j) > 0.0)) return std::numeric_limits<double>::infinity();
        logdet += 2.0 * std::log(diag(j));
    }
    const double loss = m.trace() - logdet - static_cast<double>(p);
    return std::max(loss, 0.0);
}

double trace_power_mean(const Matrix& m, int l) {
    if (l < 1) fail(ErrorCode::BadArgument, "trace power needs l >= 1");
    if (m.rows() != m.cols() || m.rows() == 0) fail(ErrorCode::BadDimension, "trace power needs a square matrix");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return eig.eigenvalues().array().pow(l).sum() / static_cast<double>(m.rows());
}

double trace_power_mean_direct(const Matrix& m, int l) {
    if (l < 1) fail(ErrorCode::BadArgument, "trace power needs l >= 1");
    if (m.rows() != m.cols() || m.rows() == 0) fail(ErrorCode::BadDimension, "trace power needs a square matrix");
    Matrix power = m;
    for (int k = 1; k < l; ++k) power = (power * m).eval();
    return power.trace() / static_cast<double>(m.rows());
}

Matrix normalize_sphericity(const Matrix& sigma) {
    if (sigma.rows() != sigma.cols() || sigma.rows() == 0) fail(ErrorCode::BadDimension, "expected a square matrix");
    const double b = sigma.trace() / static_cast<double>(sigma.rows());
    if (!(b > 0.0)) fail(ErrorCode::BadArgument, "normalization needs tr(Sigma) > 0");
    return sigma / b;
}

Matrix sym_sqrt(const Matrix& sigma) {
    const Matrix sym = require_psd(sigma);
    if (sym.isDiagonal(0.0)) {
        return sym.diagonal().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    const Vector roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Matrix root = eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
    return 0.5 * (root + root.transpose());
}

}  // namespace hdcov
