#include "hdcov/power.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>

#include "hdcov/calibration.hpp"
#include "hdcov/distributions.hpp"
#include "hdcov/error.hpp"
#include "hdcov/model.hpp"

namespace hdcov {

namespace {

void check_sigma(const Matrix& sigma, const SampleShape& shape) {
    if (sigma.rows() != shape.p || sigma.cols() != shape.p) {
        fail(ErrorCode::BadDimension, "Sigma is " + std::to_string(sigma.rows()) + "x" +
                                          std::to_string(sigma.cols()) + " for p=" + std::to_string(shape.p));
    }
}

void check_spikes(const std::vector<double>& a, const SampleShape& shape) {
    if (static_cast<int>(a.size()) != shape.p) {
        fail(ErrorCode::BadDimension, "spike vector has " + std::to_string(a.size()) + " entries for p=" +
                                          std::to_string(shape.p));
    }
    for (double v : a) {
        if (!(v > -1.0) || !std::isfinite(v)) fail(ErrorCode::BadArgument, "spikes must be finite and exceed -1");
    }
}

/// log det(Sigma / b(Sigma)), or -inf when singular.
double log_det_normalized(const Matrix& sigma) {
    const Matrix m = normalize_sphericity(sigma);
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    const auto d = llt.matrixLLT().diagonal();
    if (!(d.array() > 0.0).all()) return -std::numeric_limits<double>::infinity();
    return 2.0 * d.array().log().sum();
}

double mean(const std::vector<double>& a) {
    return std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
}

Ordering compare(double first, double second) {
    if (first > second) return Ordering::FirstGreater;
    if (first < second) return Ordering::SecondGreater;
    return Ordering::Tie;
}

}  // namespace

std::string_view to_string(Ordering ordering) {
    switch (ordering) {
        case Ordering::FirstGreater: return "first";
        case Ordering::Tie: return "tie";
        case Ordering::SecondGreater: return "second";
    }
    return "unknown";
}

double mean_gap_leading(TestKind kind, const Matrix& sigma, const SampleShape& shape) {
    shape.validate();
    check_sigma(sigma, shape);
    const double n = shape.N();
    const Matrix id = Matrix::Identity(shape.p, shape.p);
    switch (kind) {
        case TestKind::LrtIdentity:
            return 0.5 * n * stein_loss(sigma, id);
        case TestKind::NagaoLedoitWolf:
            return 0.25 * n * (sigma - id).squaredNorm();
        case TestKind::LrtSphericity:
            return -0.5 * n * log_det_normalized(sigma);
        case TestKind::John:
            return 0.25 * n * (normalize_sphericity(sigma) - id).squaredNorm();
    }
    fail(ErrorCode::BadArgument, "unknown test kind");
}

double power_from_tau(double tau, double alpha) {
    const double z = upper_critical_value(alpha);
    if (tau == std::numeric_limits<double>::infinity()) return 1.0;
    return 1.0 - normal_cdf(z - tau);
}

PowerPrediction analytic_power(TestKind kind, const Matrix& sigma, const SampleShape& shape, double alpha,
                               double sigma_null) {
    if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::BadArgument, "alpha must lie in (0, 1)");
    if (!(sigma_null > 0.0)) fail(ErrorCode::BadArgument, "sigma_null must be positive");
    PowerPrediction out;
    out.kind = kind;
    out.components = {mean_gap_leading(kind, sigma, shape), sigma_null, alpha};
    out.tau = out.components.mean_gap_leading / sigma_null;
    out.power = power_from_tau(out.tau, alpha);
    return out;
}

PowerPrediction analytic_power(TestKind kind, const Matrix& sigma, const SampleShape& shape, double alpha) {
    return analytic_power(kind, sigma, shape, alpha, std::sqrt(null_variance_asymptotic(kind, shape)));
}

double spiked_tau(TestKind kind, const std::vector<double>& a, const SampleShape& shape) {
    require_nondegenerate(kind, shape);
    check_spikes(a, shape);
    const double y = shape.y();
    const double abar = mean(a);
    const double lrt_scale = std::sqrt(2.0 * (-y - std::log1p(-y)));
    double total = 0.0;
    switch (kind) {
        case TestKind::LrtIdentity:
            for (double v : a) total += v - std::log1p(v);
            return total / lrt_scale;
        case TestKind::NagaoLedoitWolf:
            for (double v : a) total += v * v;
            return total / (2.0 * y);
        case TestKind::LrtSphericity:
            for (double v : a) total += std::log1p(abar) - std::log1p(v);
            return total / lrt_scale;
        case TestKind::John:
            for (double v : a) total += (v - abar) * (v - abar);
            return total / ((1.0 + abar) * (1.0 + abar)) / (2.0 * y);
    }
    fail(ErrorCode::BadArgument, "unknown test kind");
}

double spiked_power(TestKind kind, const std::vector<double>& a, const SampleShape& shape, double alpha) {
    return power_from_tau(spiked_tau(kind, a, shape), alpha);
}

PowerOrdering power_ordering(const std::vector<double>& a, const SampleShape& shape, double alpha) {
    check_spikes(a, shape);
    PowerOrdering out;
    const double abar = mean(a);
    std::vector<double> squares(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) squares[k] = a[k] * a[k];
    const double a2bar = mean(squares);
    out.boundary = abar * abar - a2bar * (1.0 - (1.0 + abar) * (1.0 + abar));
    out.beta_na = spiked_power(TestKind::NagaoLedoitWolf, a, shape, alpha);
    out.beta_jo = spiked_power(TestKind::John, a, shape, alpha);
    // Compare the mean shifts: the powers saturate at 1 in floating point.
    out.na_vs_john = compare(spiked_tau(TestKind::NagaoLedoitWolf, a, shape), spiked_tau(TestKind::John, a, shape));
    if (shape.p < shape.N()) {
        out.beta_lrt = spiked_power(TestKind::LrtIdentity, a, shape, alpha);
        out.beta_lrts = spiked_power(TestKind::LrtSphericity, a, shape, alpha);
        out.lrt_vs_lrts = compare(spiked_tau(TestKind::LrtIdentity, a, shape),
                                  spiked_tau(TestKind::LrtSphericity, a, shape));
    }
    return out;
}

}  // namespace hdcov
