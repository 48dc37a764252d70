#include "hdcov/statistics.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "hdcov/error.hpp"

namespace hdcov {

namespace {

void check_data(const DataMatrix& x) {
    if (x.rows() < 1 || x.cols() < 1) fail(ErrorCode::BadDimension, "data matrix must be nonempty");
    if (!x.allFinite()) fail(ErrorCode::BadArgument, "data matrix has non-finite entries");
}

/// Cholesky of a PD matrix or DegenerateStatistic.
Eigen::LLT<Matrix> chol_or_degenerate(const Matrix& s, TestKind kind) {
    Eigen::LLT<Matrix> llt(s);
    if (llt.info() != Eigen::Success || !(llt.matrixLLT().diagonal().array() > 0.0).all()) {
        fail(ErrorCode::DegenerateStatistic,
             std::string(to_string(kind)) + " needs a nonsingular sample covariance");
    }
    return llt;
}

double log_det(const Eigen::LLT<Matrix>& llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

Matrix inverse_of(const Eigen::LLT<Matrix>& llt, Eigen::Index p) {
    Matrix inv = llt.solve(Matrix::Identity(p, p));
    return 0.5 * (inv + inv.transpose());
}

double require_trace(const Matrix& s) {
    const double tr = s.trace();
    if (!(tr > 0.0)) fail(ErrorCode::ZeroTrace, "sphericity statistics need tr(S) > 0");
    return tr;
}

/// Row-major vectorization matching the Hessian index order.
Vector vec_row_major(const Matrix& m) {
    Vector v(m.size());
    const Eigen::Index cols = m.cols();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < cols; ++j) v(i * cols + j) = m(i, j);
    return v;
}

/// H += kron(A, B) with A indexed by rows of X and B by columns.
void add_kron(Matrix& h, const Matrix& a, const Matrix& b, double scale) {
    const Eigen::Index p = b.rows();
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index k = 0; k < a.cols(); ++k) {
            const double aik = scale * a(i, k);
            if (aik != 0.0) h.block(i * p, k * p, p, p) += aik * b;
        }
}

/// H((i,j),(i',j')) += scale * Y(i,j') * Y(i',j).
void add_cross(Matrix& h, const Matrix& y, double scale) {
    const Eigen::Index n = y.rows();
    const Eigen::Index p = y.cols();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j)
            for (Eigen::Index i2 = 0; i2 < n; ++i2)
                for (Eigen::Index j2 = 0; j2 < p; ++j2) h(i * p + j, i2 * p + j2) += scale * y(i, j2) * y(i2, j);
}

void check_index(const EntryIndex& e, int N, int p) {
    if (e.i < 0 || e.i >= N || e.j < 0 || e.j >= p) {
        fail(ErrorCode::BadIndex, "index (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                                      ") outside [N]x[p] = [" + std::to_string(N) + "]x[" + std::to_string(p) + "]");
    }
}

}  // namespace

Matrix sample_cov_known_mean(const DataMatrix& x) {
    check_data(x);
    Matrix s = x.transpose() * x / static_cast<double>(x.rows());
    return 0.5 * (s + s.transpose());
}

UnknownMeanCovariance sample_cov_unknown_mean(const DataMatrix& x) {
    if (x.rows() < 2) fail(ErrorCode::InsufficientSamples, "unknown-mean covariance needs n >= 2 rows");
    check_data(x);
    const double n = static_cast<double>(x.rows());
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Matrix centered = x.rowwise() - mean;
    Matrix s_star = centered.transpose() * centered / n;
    s_star = 0.5 * (s_star + s_star.transpose()).eval();
    return {s_star, s_star * (n / (n - 1.0))};
}

double statistic(TestKind kind, const Matrix& s, int N) {
    if (s.rows() != s.cols() || s.rows() < 1) fail(ErrorCode::BadDimension, "S must be square and nonempty");
    if (N < 1) fail(ErrorCode::InsufficientSamples, "N must be positive");
    const double n = static_cast<double>(N);
    const double p = static_cast<double>(s.rows());
    const Matrix id = Matrix::Identity(s.rows(), s.cols());
    switch (kind) {
        case TestKind::LrtIdentity: {
            const auto llt = chol_or_degenerate(s, kind);
            return 0.5 * n * (s.trace() - log_det(llt) - p);
        }
        case TestKind::NagaoLedoitWolf: {
            const double tr = s.trace();
            return 0.25 * n * ((s - id).squaredNorm() - tr * tr / n);
        }
        case TestKind::LrtSphericity: {
            const double tr = require_trace(s);
            const auto llt = chol_or_degenerate(s, kind);
            return 0.5 * n * (p * std::log(tr) - log_det(llt) - p * std::log(p));
        }
        case TestKind::John: {
            const double b = require_trace(s) / p;
            return 0.25 * n * (s / b - id).squaredNorm();
        }
    }
    fail(ErrorCode::BadArgument, "unknown test kind");
}

double statistic_of_data(TestKind kind, const DataMatrix& x) {
    if (is_lrt(kind) || x.cols() <= x.rows()) {
        return statistic(kind, sample_cov_known_mean(x), static_cast<int>(x.rows()));
    }
    // Trace functionals through the smaller N x N Gram matrix.
    check_data(x);
    const double n = static_cast<double>(x.rows());
    const double p = static_cast<double>(x.cols());
    const Matrix gram = x * x.transpose() / n;
    const double tr = gram.trace();
    const double tr2 = gram.squaredNorm();
    if (kind == TestKind::NagaoLedoitWolf) return 0.25 * n * (tr2 - 2.0 * tr + p - tr * tr / n);
    if (!(tr > 0.0)) fail(ErrorCode::ZeroTrace, "sphericity statistics need tr(S) > 0");
    const double b = tr / p;
    return 0.25 * n * (tr2 / (b * b) - p);
}

Matrix gradient(TestKind kind, const DataMatrix& x) {
    const Matrix s = sample_cov_known_mean(x);
    const Eigen::Index p = s.rows();
    const double n = static_cast<double>(x.rows());
    switch (kind) {
        case TestKind::LrtIdentity: {
            const Matrix a = inverse_of(chol_or_degenerate(s, kind), p);
            return x - x * a;
        }
        case TestKind::NagaoLedoitWolf:
            return x * s - x - (s.trace() / n) * x;
        case TestKind::LrtSphericity: {
            const double b = require_trace(s) / static_cast<double>(p);
            const Matrix a = inverse_of(chol_or_degenerate(s, kind), p);
            return x - x * a + (1.0 / b - 1.0) * x;
        }
        case TestKind::John: {
            const double b = require_trace(s) / static_cast<double>(p);
            const double b2 = s.squaredNorm() / static_cast<double>(p);
            return x * s / (b * b) - x * (b2 / (b * b * b));
        }
    }
    fail(ErrorCode::BadArgument, "unknown test kind");
}

Matrix hessian(TestKind kind, const DataMatrix& x) {
    const Eigen::Index rows = x.rows();
    const Eigen::Index p = x.cols();
    if (rows * p > kMaxHessianSize) {
        fail(ErrorCode::TooLarge, "Hessian dimension N*p = " + std::to_string(rows * p) + " exceeds " +
                                      std::to_string(kMaxHessianSize));
    }
    const Matrix s = sample_cov_known_mean(x);
    const double n = static_cast<double>(rows);
    const double pd = static_cast<double>(p);
    const Matrix id_p = Matrix::Identity(p, p);
    const Matrix id_n = Matrix::Identity(rows, rows);
    const Vector v = vec_row_major(x);
    Matrix h = Matrix::Zero(rows * p, rows * p);

    auto add_lrt_part = [&](const Matrix& a) {
        const Matrix y = x * a;
        const Matrix g = y * x.transpose();
        add_cross(h, y, 1.0 / n);
        add_kron(h, g, a, 1.0 / n);
        add_kron(h, id_n, id_p - a, 1.0);
    };

    switch (kind) {
        case TestKind::LrtIdentity:
            add_lrt_part(inverse_of(chol_or_degenerate(s, kind), p));
            break;
        case TestKind::NagaoLedoitWolf: {
            const Matrix gram = x * x.transpose();
            add_kron(h, gram, id_p, 1.0 / n);
            add_cross(h, x, 1.0 / n);
            add_kron(h, id_n, s - id_p, 1.0);
            h.noalias() -= (2.0 / (n * n)) * v * v.transpose();
            h.diagonal().array() -= s.trace() / n;
            break;
        }
        case TestKind::LrtSphericity: {
            const double b = require_trace(s) / pd;
            add_lrt_part(inverse_of(chol_or_degenerate(s, kind), p));
            h.diagonal().array() += 1.0 / b - 1.0;
            h.noalias() -= (2.0 / (n * pd * b * b)) * v * v.transpose();
            break;
        }
        case TestKind::John: {
            const double b = require_trace(s) / pd;
            const double b2 = s.squaredNorm() / pd;
            const double inv_b2 = 1.0 / (b * b);
            const Matrix gram = x * x.transpose();
            add_kron(h, gram, id_p, inv_b2 / n);
            add_cross(h, x, inv_b2 / n);
            add_kron(h, id_n, s, inv_b2);
            h.diagonal().array() -= b2 / (b * b * b);
            h.noalias() += (6.0 * b2 / (b * b * b * b * n * pd)) * v * v.transpose();
            const Vector w = vec_row_major(x * s);
            const double c = 4.0 / (b * b * b * n * pd);
            h.noalias() -= c * (w * v.transpose() + v * w.transpose());
            break;
        }
    }
    return h;
}

double nagao_third_derivative(const DataMatrix& x, const std::array<EntryIndex, 3>& idx) {
    const int N = static_cast<int>(x.rows());
    const int p = static_cast<int>(x.cols());
    for (const auto& e : idx) check_index(e, N, p);
    const auto [i1, j1] = idx[0];
    const auto [i2, j2] = idx[1];
    const auto [i3, j3] = idx[2];
    auto d = [](int a, int b) { return a == b ? 1.0 : 0.0; };
    const double n = static_cast<double>(N);
    const double first = d(i1, i3) * d(j1, j2) * x(i2, j3) + d(i2, i3) * d(j1, j2) * x(i1, j3) +
                         d(i2, i3) * d(j1, j3) * x(i1, j2) + d(i1, i3) * d(j2, j3) * x(i2, j1) +
                         d(i1, i2) * d(j1, j3) * x(i3, j2) + d(i1, i2) * d(j2, j3) * x(i3, j1);
    const double second = d(i1, i3) * d(j1, j3) * x(i2, j2) + d(i2, i3) * d(j2, j3) * x(i1, j1) +
                          d(i1, i2) * d(j1, j2) * x(i3, j3);
    return first / n - 2.0 * second / (n * n);
}

double nagao_fourth_derivative(int N, int p, const std::array<EntryIndex, 4>& idx) {
    if (N < 1 || p < 1) fail(ErrorCode::BadDimension, "N and p must be positive");
    for (const auto& e : idx) check_index(e, N, p);
    const auto [i1, j1] = idx[0];
    const auto [i2, j2] = idx[1];
    const auto [i3, j3] = idx[2];
    const auto [i4, j4] = idx[3];
    auto d = [](int a, int b) { return a == b ? 1.0 : 0.0; };
    const double n = static_cast<double>(N);
    const double first = d(i1, i3) * d(i2, i4) * d(j1, j2) * d(j3, j4) + d(i1, i4) * d(i2, i3) * d(j1, j2) * d(j3, j4) +
                         d(i1, i4) * d(i2, i3) * d(j1, j3) * d(j2, j4) + d(i1, i3) * d(i2, i4) * d(j1, j4) * d(j2, j3) +
                         d(i1, i2) * d(i3, i4) * d(j1, j3) * d(j2, j4) + d(i1, i2) * d(i3, i4) * d(j1, j4) * d(j2, j3);
    const double second = d(i1, i3) * d(i2, i4) * d(j1, j3) * d(j2, j4) +
                          d(i1, i4) * d(i2, i3) * d(j1, j4) * d(j2, j3) +
                          d(i1, i2) * d(i3, i4) * d(j1, j2) * d(j3, j4);
    return first / n - 2.0 * second / (n * n);
}

}  // namespace hdcov
