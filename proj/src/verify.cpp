#include "hdcov/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <map>
#include <sstream>

#include <Eigen/QR>

#include "hdcov/calibration.hpp"
#include "hdcov/contiguity.hpp"
#include "hdcov/distributions.hpp"
#include "hdcov/error.hpp"
#include "hdcov/mclab.hpp"
#include "hdcov/model.hpp"
#include "hdcov/parallel.hpp"
#include "hdcov/power.hpp"
#include "hdcov/rng.hpp"
#include "hdcov/statistics.hpp"

namespace hdcov {

namespace {

struct ScaleParams {
    int gradient_instances;
    int dispersion_reps;
    int nagao_mean_reps;
    int wishart_reps;
    int clt_reps;
    int clt_trend_reps;
    int power_reps;
    int power_calib_reps;
    int size_reps;
    int size_calib_reps;
    int ordering_draws;
    int decay_reps;
    int exact_mean_reps;
};

ScaleParams params_for(VerifyScale scale) {
    if (scale == VerifyScale::Smoke) return {4, 200, 500, 1000, 1000, 1000, 200, 500, 500, 500, 100, 100, 500};
    return {20, 2000, 20000, 50000, 5000, 40000, 2000, 10000, 5000, 20000, 1000, 200, 20000};
}

/// FNV-1a over the bit patterns of doubles.
class Fingerprint {
public:
    void add(double value) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &value, sizeof bits);
        for (int k = 0; k < 8; ++k) {
            hash_ ^= (bits >> (8 * k)) & 0xffu;
            hash_ *= 0x100000001b3ULL;
        }
    }
    std::uint64_t value() const { return hash_; }

private:
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

struct Context {
    const VerifyOptions& options;
    ScaleParams scale;
    unsigned threads;
    Fingerprint fingerprint;
    std::map<std::string, NullCalibration> calibrations;
    std::optional<std::array<McEstimate, 7>> wishart_identity;

    std::uint64_t seed(std::uint64_t salt) const { return derive_seed(options.seed, salt); }

    /// Monte Carlo calibration shared between checks of one run.
    const NullCalibration& calibration(TestKind kind, const SampleShape& shape, int reps, std::uint64_t salt) {
        const std::string key = std::string(to_string(kind)) + "/" + std::to_string(shape.n) + "/" +
                                std::to_string(shape.p) + "/" + std::to_string(reps) + "/" + std::to_string(salt);
        auto it = calibrations.find(key);
        if (it == calibrations.end()) {
            it = calibrations.emplace(key, null_calibrate_mc(kind, shape, reps, seed(salt), static_cast<int>(threads)))
                     .first;
        }
        return it->second;
    }

    Matrix grad(TestKind kind, const DataMatrix& x) const {
        return options.gradient_override ? options.gradient_override(kind, x) : gradient(kind, x);
    }
};

struct CheckSpec {
    std::string name;
    int criterion;
    bool randomized;
    std::function<void(Context&, CheckResult&)> run;
};

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

double rel_error(const Matrix& a, const Matrix& b) {
    return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), 1e-12);
}

double fd_step(double x) { return std::cbrt(std::numeric_limits<double>::epsilon()) * (1.0 + std::abs(x)); }

Matrix fd_gradient(TestKind kind, const DataMatrix& x) {
    Matrix g(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const double h = fd_step(x(i, j));
            DataMatrix plus = x;
            DataMatrix minus = x;
            plus(i, j) += h;
            minus(i, j) -= h;
            g(i, j) = (statistic_of_data(kind, plus) - statistic_of_data(kind, minus)) / (2.0 * h);
        }
    return g;
}

Matrix fd_hessian(const Context& ctx, TestKind kind, const DataMatrix& x) {
    const Eigen::Index p = x.cols();
    Matrix h(x.size(), x.size());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < p; ++j) {
            const double step = fd_step(x(i, j));
            DataMatrix plus = x;
            DataMatrix minus = x;
            plus(i, j) += step;
            minus(i, j) -= step;
            const Matrix diff = (ctx.grad(kind, plus) - ctx.grad(kind, minus)) / (2.0 * step);
            for (Eigen::Index a = 0; a < x.rows(); ++a)
                for (Eigen::Index b = 0; b < p; ++b) h(a * p + b, i * p + j) = diff(a, b);
        }
    return h;
}

/// Instance k of the derivative grid (N, p) in {6, 8} x {2, 3, 4}.
DataMatrix derivative_instance(const Context& ctx, int k) {
    const int N = (k % 2 == 0) ? 6 : 8;
    const int p = 2 + (k / 2) % 3;
    RandomStream stream(ctx.options.seed, StreamPurpose::Verification, 1000 + static_cast<std::uint64_t>(k));
    return standard_normal_matrix(N, p, stream);
}

/// Q diag(lambda) Q^T with Haar-like Q and eigenvalues uniform on [lo, hi].
Matrix random_covariance(RandomStream& stream, int p, double lo, double hi) {
    const Matrix g = standard_normal_matrix(p, p, stream);
    const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
    Vector lambda(p);
    for (int j = 0; j < p; ++j) lambda(j) = lo + (hi - lo) * stream.uniform();
    Matrix sigma = q * lambda.asDiagonal() * q.transpose();
    return 0.5 * (sigma + sigma.transpose());
}

Matrix random_diagonal(RandomStream& stream, int p, double lo, double hi) {
    Vector lambda(p);
    for (int j = 0; j < p; ++j) lambda(j) = lo + (hi - lo) * stream.uniform();
    return lambda.asDiagonal();
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k] / n;
        my += y[k] / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
    }
    return sxy / sxx;
}

/// Largest entrywise deviation relative to the scale of the reference.
double matrix_mismatch(const Matrix& a, const Matrix& b) {
    return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

constexpr double kAlpha = 0.05;

void add_derivative_checks(std::vector<CheckSpec>& specs) {
    for (TestKind kind : kAllTestKinds) {
        const std::string tag(to_string(kind));
        specs.push_back({"gradient_fd_" + tag, 1, false, [kind](Context& ctx, CheckResult& r) {
                             double worst = 0.0;
                             for (int k = 0; k < ctx.scale.gradient_instances; ++k) {
                                 const DataMatrix x = derivative_instance(ctx, k);
                                 worst = std::max(worst, rel_error(ctx.grad(kind, x), fd_gradient(kind, x)));
                             }
                             r.observed = worst;
                             r.tolerance = 1e-5;
                             r.passed = worst <= r.tolerance;
                             r.detail = "max relative error over " + std::to_string(ctx.scale.gradient_instances) +
                                        " instances";
                         }});
    }
    for (TestKind kind : kAllTestKinds) {
        const std::string tag(to_string(kind));
        specs.push_back({"hessian_fd_" + tag, 1, false, [kind](Context& ctx, CheckResult& r) {
                             double worst = 0.0;
                             double asymmetry = 0.0;
                             for (int k = 0; k < ctx.scale.gradient_instances; ++k) {
                                 const DataMatrix x = derivative_instance(ctx, k);
                                 const Matrix h = hessian(kind, x);
                                 worst = std::max(worst, rel_error(h, fd_hessian(ctx, kind, x)));
                                 asymmetry = std::max(asymmetry, rel_error(h.transpose(), h));
                             }
                             r.observed = worst;
                             r.tolerance = 1e-4;
                             r.passed = worst <= r.tolerance && asymmetry <= 1e-9;
                             r.detail = "max relative error; asymmetry " + fmt(asymmetry);
                         }});
    }
    specs.push_back({"nagao_third_derivative_fd", 0, false, [](Context& ctx, CheckResult& r) {
                         // The Hessian is quadratic in X, so central differences are exact up to roundoff.
                         RandomStream stream(ctx.options.seed, StreamPurpose::Verification, 2000);
                         const DataMatrix x = standard_normal_matrix(4, 2, stream);
                         const int np = 8;
                         const double h = 0.5;
                         double worst = 0.0;
                         for (int c = 0; c < np; ++c) {
                             DataMatrix plus = x, minus = x;
                             plus(c / 2, c % 2) += h;
                             minus(c / 2, c % 2) -= h;
                             const Matrix diff = (hessian(TestKind::NagaoLedoitWolf, plus) -
                                                  hessian(TestKind::NagaoLedoitWolf, minus)) /
                                                 (2.0 * h);
                             for (int a = 0; a < np; ++a)
                                 for (int b = 0; b < np; ++b) {
                                     const double exact = nagao_third_derivative(
                                         x, {EntryIndex{a / 2, a % 2}, EntryIndex{b / 2, b % 2}, EntryIndex{c / 2, c % 2}});
                                     worst = std::max(worst, std::abs(exact - diff(a, b)));
                                 }
                         }
                         r.observed = worst;
                         r.tolerance = 1e-9;
                         r.passed = worst <= r.tolerance;
                         r.detail = "max abs error over all 512 index triples at N=4, p=2";
                     }});
    specs.push_back({"nagao_fourth_derivative_fd", 0, false, [](Context& ctx, CheckResult& r) {
                         RandomStream stream(ctx.options.seed, StreamPurpose::Verification, 2001);
                         const DataMatrix x = standard_normal_matrix(4, 2, stream);
                         const int np = 8;
                         const double h = 0.5;
                         double worst = 0.0;
                         for (int c = 0; c < np; ++c)
                             for (int d = 0; d < np; ++d) {
                                 auto shifted = [&](double sc, double sd) {
                                     DataMatrix y = x;
                                     y(c / 2, c % 2) += sc;
                                     y(d / 2, d % 2) += sd;
                                     return hessian(TestKind::NagaoLedoitWolf, y);
                                 };
                                 const Matrix diff =
                                     (shifted(h, h) - shifted(h, -h) - shifted(-h, h) + shifted(-h, -h)) / (4.0 * h * h);
                                 for (int a = 0; a < np; ++a)
                                     for (int b = 0; b < np; ++b) {
                                         const double exact = nagao_fourth_derivative(
                                             4, 2,
                                             {EntryIndex{a / 2, a % 2}, EntryIndex{b / 2, b % 2}, EntryIndex{c / 2, c % 2},
                                              EntryIndex{d / 2, d % 2}});
                                         worst = std::max(worst, std::abs(exact - diff(a, b)));
                                     }
                             }
                         const double coincident = nagao_fourth_derivative(4, 2, {EntryIndex{1, 1}, {1, 1}, {1, 1}, {1, 1}});
                         const double coincident_expected = 6.0 / 4.0 - 6.0 / 16.0;
                         r.observed = worst;
                         r.tolerance = 1e-9;
                         r.passed = worst <= r.tolerance && std::abs(coincident - coincident_expected) <= 1e-15;
                         r.detail = "max abs error over 4096 index quadruples; coincident value " + fmt(coincident);
                     }});
}

void add_dispersion_checks(std::vector<CheckSpec>& specs) {
    specs.push_back({"lrt_dispersion_closed_form", 2, true, [](Context& ctx, CheckResult& r) {
                         const SampleShape shape = SampleShape::from_N(40, 10);
                         double worst = 0.0;
                         for (int k = 0; k < 10; ++k) {
                             RandomStream stream(ctx.options.seed, StreamPurpose::Verification, 3000 + k);
                             const Matrix sigma = random_covariance(stream, shape.p, 0.5, 2.0);
                             const McEstimate est = dispersion_mc(TestKind::LrtIdentity, sigma, shape,
                                                                  ctx.scale.dispersion_reps, ctx.seed(3100 + k),
                                                                  static_cast<int>(ctx.threads));
                             const double target = dispersion_closed_lrt(sigma, shape.N());
                             worst = std::max(worst, std::abs(est.value - target) / est.std_error);
                             ctx.fingerprint.add(est.value);
                         }
                         r.observed = worst;
                         r.tolerance = 3.0;
                         r.passed = worst <= r.tolerance;
                         r.detail = "max |MC - N||Sigma-I||^2| / SE over 10 random Sigma";
                     }});
}

void add_mean_checks(std::vector<CheckSpec>& specs) {
    specs.push_back({"nagao_mean_closed_form", 3, true, [](Context& ctx, CheckResult& r) {
                         const SampleShape shape = SampleShape::from_N(50, 10);
                         const double m0 = null_mean_exact(TestKind::NagaoLedoitWolf, shape);
                         double worst = 0.0;
                         for (int k = 0; k < 5; ++k) {
                             RandomStream stream(ctx.options.seed, StreamPurpose::Verification, 4000 + k);
                             const Matrix sigma = random_diagonal(stream, shape.p, 0.5, 2.0);
                             const MeanGap gap = mean_gap_with_residual(TestKind::NagaoLedoitWolf, sigma, shape);
                             const McEstimate est = statistic_mean_mc(TestKind::NagaoLedoitWolf, sigma, shape,
                                                                      ctx.scale.nagao_mean_reps, ctx.seed(4100 + k),
                                                                      static_cast<int>(ctx.threads));
                             worst = std::max(worst, std::abs(est.value - (gap.gap() + m0)) / est.std_error);
                             ctx.fingerprint.add(est.value);
                         }
                         r.observed = worst;
                         r.tolerance = 4.0;
                         r.passed = worst <= r.tolerance;
                         r.detail = "max |MC mean - closed form| / SE over 5 random diagonal Sigma";
                     }});
    specs.push_back({"lrt_exact_mean_vs_mc", 0, true, [](Context& ctx, CheckResult& r) {
                         const SampleShape shape = SampleShape::from_N(60, 10);
                         double worst = 0.0;
                         for (TestKind kind : {TestKind::LrtIdentity, TestKind::LrtSphericity}) {
                             const double exact = null_mean_exact(kind, shape);
                             const McEstimate est =
                                 statistic_mean_mc(kind, Matrix::Identity(shape.p, shape.p), shape,
                                                   ctx.scale.exact_mean_reps, ctx.seed(4200), static_cast<int>(ctx.threads));
                             worst = std::max(worst, std::abs(est.value - exact) / est.std_error);
                             ctx.fingerprint.add(est.value);
                         }
                         r.observed = worst;
                         r.tolerance = 4.0;
                         r.passed = worst <= r.tolerance;
                         r.detail = "digamma null means of lrt and lrt-s vs MC, |z| max";
                     }});
}

void add_wishart_checks(std::vector<CheckSpec>& specs) {
    for (std::size_t k = 0; k < kAllWishartMoments.size(); ++k) {
        const WishartMoment moment = kAllWishartMoments[k];
        specs.push_back({"wishart_" + std::string(to_string(moment)), 4, true, [k, moment](Context& ctx, CheckResult& r) {
                             const SampleShape shape = SampleShape::from_N(20, 10);
                             const Matrix id = Matrix::Identity(shape.p, shape.p);
                             // One set of draws serves all seven moments.
                             if (!ctx.wishart_identity) {
                                 ctx.wishart_identity = wishart_trace_mc(id, shape, ctx.scale.wishart_reps, ctx.seed(5000),
                                                                         static_cast<int>(ctx.threads));
                             }
                             const McEstimate& est = (*ctx.wishart_identity)[k];
                             r.expected = wishart_trace_oracle(moment, id, shape);
                             r.observed = est.value;
                             r.tolerance = 4.0 * est.std_error;
                             r.passed = std::abs(est.value - r.expected) <= r.tolerance;
                             r.detail = "z = " + fmt((est.value - r.expected) / est.std_error);
                             ctx.fingerprint.add(est.value);
                         }});
    }
    specs.push_back({"wishart_spot_values", 4, false, [](Context&, CheckResult& r) {
                         const double tr_s3 = wishart_trace_oracle(WishartMoment::TrS3, Matrix::Identity(2, 2),
                                                                   SampleShape::from_N(2, 2));
                         bool ok = std::abs(tr_s3 - 18.0) <= 1e-12;
                         double worst = std::abs(tr_s3 - 18.0);
                         for (int N : {5, 20, 40})
                             for (int p : {1, 3, 10}) {
                                 const double v = wishart_trace_oracle(WishartMoment::Tr2S, Matrix::Identity(p, p),
                                                                       SampleShape::from_N(N, p));
                                 const double expected = static_cast<double>(p) * p + 2.0 * p / N;
                                 worst = std::max(worst, std::abs(v - expected) / expected);
                             }
                         ok = ok && worst <= 1e-12;
                         r.observed = tr_s3;
                         r.expected = 18.0;
                         r.tolerance = 1e-12;
                         r.passed = ok;
                         r.detail = "E tr S^3 at N=p=2 and E tr^2 S = p^2 + 2p/N at Sigma=I";
                     }});
    specs.push_back({"wishart_general_sigma", 0, true, [](Context& ctx, CheckResult& r) {
                         double worst = 0.0;
                         int index = 0;
                         for (auto [N, p] : {std::pair{20, 10}, {40, 10}, {10, 20}}) {
                             const SampleShape shape = SampleShape::from_N(N, p);
                             RandomStream stream(ctx.options.seed, StreamPurpose::Verification, 5100 + index);
                             const Matrix sigma = random_diagonal(stream, p, 0.5, 2.0);
                             const auto est = wishart_trace_mc(sigma, shape, ctx.scale.wishart_reps / 5,
                                                               ctx.seed(5200 + index), static_cast<int>(ctx.threads));
                             for (std::size_t k = 0; k < 2; ++k) {
                                 const double exact = wishart_trace_oracle(kAllWishartMoments[k], sigma, shape);
                                 worst = std::max(worst, std::abs(est[k].value - exact) / est[k].std_error);
                                 ctx.fingerprint.add(est[k].value);
                             }
                             ++index;
                         }
                         r.observed = worst;
                         r.tolerance = 4.0;
                         r.passed = worst <= r.tolerance;
                         r.detail = "E tr S^2 and E tr^2 S at random diagonal Sigma, |z| max";
                     }});
}

void add_u_matrix_checks(std::vector<CheckSpec>& specs) {
    auto instances = [](const Context& ctx) {
        std::vector<DataMatrix> xs;
        for (int k = 0; k < 5; ++k) {
            RandomStream stream(ctx.options.seed, StreamPurpose::Verification, 6000 + k);
            xs.push_back(standard_normal_matrix(6, 3, stream));
        }
        return xs;
    };
    specs.push_back({"u_matrix_semigroup", 5, false, [instances](Context& ctx, CheckResult& r) {
                         double worst = 0.0;
                         for (const DataMatrix& x : instances(ctx))
                             for (int l1 = 0; l1 <= 4; ++l1)
                                 for (int m1 = 0; l1 + m1 <= 4; ++m1)
                                     for (int l2 = 0; l2 <= 4; ++l2)
                                         for (int m2 = 0; l2 + m2 <= 4; ++m2) {
                                             if (l1 + l2 < 1) continue;
                                             for (USign sign : {USign::Inverse, USign::Plus}) {
                                                 const int l = sign == USign::Inverse ? l1 + l2 - 1 : l1 + l2 + 1;
                                                 const Matrix prod = u_matrix(l1, m1, sign, x).entries *
                                                                     u_matrix(l2, m2, sign, x).entries;
                                                 worst = std::max(worst,
                                                                  matrix_mismatch(prod, u_matrix(l, m1 + m2, sign, x).entries));
                                             }
                                         }
                         r.observed = worst;
                         r.tolerance = 1e-9;
                         r.passed = worst <= r.tolerance;
                         r.detail = "inverse and plus families, l+m <= 4 per factor, 5 random X at N=6, p=3";
                     }});
    specs.push_back({"u_matrix_norm_identity", 5, false, [instances](Context& ctx, CheckResult& r) {
                         double worst = 0.0;
                         double worst_l0 = 0.0;
                         for (const DataMatrix& x : instances(ctx)) {
                             const Matrix s = sample_cov_known_mean(x);
                             const double inv_norm = symmetric_opnorm(s.inverse());
                             const double s_norm = symmetric_opnorm(s);
                             for (int l = 0; l <= 4; ++l)
                                 for (int m = 0; l + m <= 4; ++m) {
                                     const double norm = symmetric_opnorm(u_matrix(l, m, USign::Inverse, x).entries);
                                     if (l >= 1) {
                                         const double target = std::pow(inv_norm, l + m - 1);
                                         worst = std::max(worst, std::abs(norm - target) / target);
                                     } else {
                                         // For l = 0 the norm is ||S|| ||S^-1||^m.
                                         const double target = s_norm * std::pow(inv_norm, m);
                                         worst_l0 = std::max(worst_l0, std::abs(norm - target) / target);
                                     }
                                 }
                         }
                         r.observed = worst;
                         r.tolerance = 1e-9;
                         r.passed = worst <= r.tolerance && worst_l0 <= 1e-9;
                         r.detail = "||U_{l,m}|| = ||S^-1||^{l+m-1} for l >= 1; l = 0 gives ||S|| ||S^-1||^m (rel err " +
                                    fmt(worst_l0) + ")";
                     }});
    specs.push_back({"u_matrix_plus_bound", 5, false, [instances](Context& ctx, CheckResult& r) {
                         double worst_excess = -1.0;
                         for (const DataMatrix& x : instances(ctx)) {
                             const double s_norm = symmetric_opnorm(sample_cov_known_mean(x));
                             for (int l = 0; l <= 4; ++l)
                                 for (int m = 0; l + m <= 4; ++m) {
                                     const double norm = symmetric_opnorm(u_matrix(l, m, USign::Plus, x).entries);
                                     const double bound = std::pow(s_norm, l + m + 1);
                                     worst_excess = std::max(worst_excess, (norm - bound) / bound);
                                 }
                         }
                         r.observed = worst_excess;
                         r.tolerance = 1e-9;
                         r.passed = worst_excess <= r.tolerance;
                         r.detail = "max (||U_{l,m;+}|| - ||S||^{l+m+1}) / ||S||^{l+m+1}";
                     }});
}

void add_clt_checks(std::vector<CheckSpec>& specs) {
    for (TestKind kind : kAllTestKinds) {
        const std::string tag(to_string(kind));
        specs.push_back({"clt_dkol_" + tag, 6, true, [kind](Context& ctx, CheckResult& r) {
                             const CltCheck check =
                                 null_clt_check(kind, SampleShape::from_N(200, 50), ctx.scale.clt_reps,
                                                ctx.seed(7000 + static_cast<int>(kind)), std::nullopt,
                                                static_cast<int>(ctx.threads));
                             r.observed = check.d_kol;
                             r.tolerance = 0.05;
                             r.passed = check.d_kol <= r.tolerance;
                             r.detail = "N=200, p=50, reps=" + std::to_string(ctx.scale.clt_reps);
                             ctx.fingerprint.add(check.d_kol);
                         }});
    }
    for (TestKind kind : kAllTestKinds) {
        const std::string tag(to_string(kind));
        specs.push_back({"clt_trend_" + tag, 6, true, [kind](Context& ctx, CheckResult& r) {
                             std::vector<double> d;
                             std::string detail = "p/N=0.25, d_Kol at p=8,16,32:";
                             for (int p : {8, 16, 32}) {
                                 const CltCheck check =
                                     null_clt_check(kind, SampleShape::from_N(4 * p, p), ctx.scale.clt_trend_reps,
                                                    ctx.seed(7100 + 10 * static_cast<int>(kind) + p), std::nullopt,
                                                    static_cast<int>(ctx.threads));
                                 d.push_back(check.d_kol);
                                 detail += " " + fmt(check.d_kol);
                                 ctx.fingerprint.add(check.d_kol);
                             }
                             r.observed = d.back();
                             r.expected = d.front();
                             r.passed = d[0] > d[1] && d[1] > d[2];
                             r.detail = detail;
                         }});
    }
}

struct PowerCase {
    TestKind kind;
    int N;
    int p;
    std::string alternative;  // "a1=<v>" or "dense"
    double a1;
    int index;  // position within the alternatives of one (kind, shape)
};

std::vector<PowerCase> power_cases() {
    std::vector<PowerCase> cases;
    auto add = [&](TestKind kind, int N, int p) {
        int index = 0;
        for (double a1 : {0.5, 1.0, 2.0}) cases.push_back({kind, N, p, "a1=" + fmt(a1), a1, index++});
        cases.push_back({kind, N, p, "dense", 0.0, index});
    };
    add(TestKind::LrtIdentity, 200, 50);
    add(TestKind::LrtSphericity, 200, 50);
    for (TestKind kind : {TestKind::NagaoLedoitWolf, TestKind::John}) {
        add(kind, 100, 100);
        add(kind, 100, 200);
    }
    return cases;
}

void add_power_checks(std::vector<CheckSpec>& specs) {
    for (const PowerCase& c : power_cases()) {
        const std::string name = "power_" + std::string(to_string(c.kind)) + "_N" + std::to_string(c.N) + "_p" +
                                 std::to_string(c.p) + "_" + c.alternative;
        specs.push_back({name, 7, true, [c](Context& ctx, CheckResult& r) {
                             const SampleShape shape = SampleShape::from_N(c.N, c.p);
                             const Matrix sigma =
                                 c.alternative == "dense"
                                     ? dense_alternative(c.kind, shape, 2.0, ctx.seed(8000 + static_cast<int>(c.kind)))
                                     : build_covariance(CovarianceSpec::spiked(c.p, {c.a1}));
                             const PowerPrediction analytic = analytic_power(c.kind, sigma, shape, kAlpha);
                             const NullCalibration& calib =
                                 ctx.calibration(c.kind, shape, ctx.scale.power_calib_reps, 8100);
                             const std::uint64_t salt = 8200 + 16 * static_cast<std::uint64_t>(c.kind) +
                                                        (c.p == 200 ? 8 : 0) + static_cast<std::uint64_t>(c.index);
                             const McEstimate emp = empirical_power(c.kind, sigma, shape, kAlpha, calib,
                                                                    ctx.scale.power_reps, ctx.seed(salt),
                                                                    static_cast<int>(ctx.threads));
                             r.observed = emp.value;
                             r.expected = analytic.power;
                             r.tolerance = 0.05;
                             r.passed = std::abs(emp.value - analytic.power) <= r.tolerance;
                             r.detail = "tau=" + fmt(analytic.tau) + ", SE=" + fmt(emp.std_error) +
                                        ", discrepancy=" + fmt(emp.value - analytic.power);
                             ctx.fingerprint.add(emp.value);
                             ctx.fingerprint.add(calib.m);
                             ctx.fingerprint.add(calib.sigma);
                         }});
    }
}

void add_size_checks(std::vector<CheckSpec>& specs) {
    for (TestKind kind : kAllTestKinds) {
        const std::string tag(to_string(kind));
        specs.push_back({"size_" + tag, 8, true, [kind](Context& ctx, CheckResult& r) {
                             const SampleShape shape =
                                 is_lrt(kind) ? SampleShape::from_N(200, 50) : SampleShape::from_N(100, 100);
                             const NullCalibration& calib =
                                 ctx.calibration(kind, shape, ctx.scale.size_calib_reps, 9000);
                             const McEstimate emp = empirical_power(kind, Matrix::Identity(shape.p, shape.p), shape,
                                                                    kAlpha, calib, ctx.scale.size_reps,
                                                                    ctx.seed(9100 + static_cast<int>(kind)),
                                                                    static_cast<int>(ctx.threads));
                             const double se = std::sqrt(kAlpha * (1.0 - kAlpha) / ctx.scale.size_reps);
                             r.observed = emp.value;
                             r.expected = kAlpha;
                             r.tolerance = 3.0 * se;
                             r.passed = std::abs(emp.value - kAlpha) <= r.tolerance;
                             r.detail = "N=" + std::to_string(shape.N()) + ", p=" + std::to_string(shape.p) +
                                        ", calibration reps=" + std::to_string(ctx.scale.size_calib_reps);
                             ctx.fingerprint.add(emp.value);
                         }});
    }
}

void add_ordering_checks(std::vector<CheckSpec>& specs) {
    specs.push_back({"ordering_lrt_vs_lrts", 9, false, [](Context& ctx, CheckResult& r) {
                         int violations = 0;
                         double min_gap = std::numeric_limits<double>::infinity();
                         for (int k = 0; k < ctx.scale.ordering_draws; ++k) {
                             RandomStream stream(ctx.options.seed, StreamPurpose::Verification, 10000 + k);
                             const int p = 2 + static_cast<int>(stream.uniform() * 49.0);
                             const int N = p + 2 + static_cast<int>(stream.uniform() * 4.0 * p);
                             const double spread = 0.1 + 1.5 * stream.uniform();
                             std::vector<double> a(static_cast<std::size_t>(p));
                             for (double& v : a) v = std::exp(spread * stream.normal()) - 1.0;
                             const SampleShape shape = SampleShape::from_N(N, p);
                             const double b_lrt = spiked_power(TestKind::LrtIdentity, a, shape, kAlpha);
                             const double b_lrts = spiked_power(TestKind::LrtSphericity, a, shape, kAlpha);
                             if (b_lrt < b_lrts) ++violations;
                             min_gap = std::min(min_gap, b_lrt - b_lrts);
                         }
                         r.observed = violations;
                         r.expected = 0.0;
                         r.passed = violations == 0;
                         r.detail = "min beta_lrt - beta_lrts = " + fmt(min_gap) + " over " +
                                    std::to_string(ctx.scale.ordering_draws) + " spike vectors";
                     }});
    specs.push_back({"ordering_na_vs_john_boundary", 9, false, [](Context& ctx, CheckResult& r) {
                         int mismatches = 0;
                         int straddling = 0;
                         int points = 0;
                         for (int k = 0; k < 200 && straddling < 50; ++k) {
                             RandomStream stream(ctx.options.seed, StreamPurpose::Verification, 11000 + k);
                             const int p = 3 + static_cast<int>(stream.uniform() * 20.0);
                             const SampleShape shape = SampleShape::from_N(p + static_cast<int>(stream.uniform() * 3.0 * p) + 1, p);
                             std::vector<double> base(static_cast<std::size_t>(p));
                             // Mostly negative directions so that the boundary is crossed before a_j hits -1.
                             for (double& v : base) v = stream.uniform() < 0.8 ? -stream.uniform() : 2.0 * stream.uniform();
                             const double lo = *std::min_element(base.begin(), base.end());
                             if (!(lo < 0.0)) continue;
                             const double t_max = 0.999 / -lo;
                             bool seen_positive = false, seen_negative = false;
                             int local_mismatch = 0;
                             for (int g = 1; g <= 60; ++g) {
                                 const double t = t_max * g / 60.0;
                                 std::vector<double> a(base);
                                 for (double& v : a) v *= t;
                                 const PowerOrdering ord = power_ordering(a, shape, kAlpha);
                                 if (std::abs(ord.boundary) < 1e-10) continue;
                                 const bool na_wins = ord.na_vs_john == Ordering::FirstGreater;
                                 const bool expect_na = ord.boundary > 0.0;
                                 if (na_wins != expect_na) ++local_mismatch;
                                 (ord.boundary > 0.0 ? seen_positive : seen_negative) = true;
                                 ++points;
                             }
                             if (seen_positive && seen_negative) ++straddling;
                             mismatches += local_mismatch;
                         }
                         r.observed = mismatches;
                         r.expected = 0.0;
                         r.passed = mismatches == 0 && straddling >= 20;
                         r.detail = std::to_string(straddling) + " straddling families, " + std::to_string(points) +
                                    " grid points";
                     }});
}

void add_contiguity_checks(std::vector<CheckSpec>& specs) {
    auto decay = [](TestKind kind, double limit, int criterion) {
        return CheckSpec{"contiguity_decay_" + std::string(to_string(kind)), criterion, kind != TestKind::LrtIdentity,
                         [kind, limit](Context& ctx, CheckResult& r) {
                             std::vector<double> lp, le;
                             std::string detail = "p/N=0.25, a1=1, err_bar at p=20,40,80,160:";
                             for (int p : {20, 40, 80, 160}) {
                                 const SampleShape shape = SampleShape::from_N(4 * p, p);
                                 const Matrix sigma = build_covariance(CovarianceSpec::spiked(p, {1.0}));
                                 ContiguityOptions opts;
                                 opts.reps = ctx.scale.decay_reps;
                                 opts.seed = ctx.seed(12000 + 1000 * static_cast<int>(kind) + p);
                                 opts.threads = static_cast<int>(ctx.threads);
                                 const double sigma_null = std::sqrt(null_variance_asymptotic(kind, shape));
                                 const ContiguityReport rep = contiguity_report(kind, sigma, shape, sigma_null, opts);
                                 lp.push_back(std::log(static_cast<double>(p)));
                                 le.push_back(std::log(rep.err_bar));
                                 detail += " " + fmt(rep.err_bar);
                                 ctx.fingerprint.add(rep.err_bar);
                             }
                             r.observed = slope(lp, le);
                             r.tolerance = limit;
                             r.passed = r.observed <= limit;
                             r.detail = detail;
                         }};
    };
    specs.push_back(decay(TestKind::LrtIdentity, -0.4, 10));
    specs.push_back(decay(TestKind::NagaoLedoitWolf, -0.4, 0));
    specs.push_back(decay(TestKind::LrtSphericity, -0.3, 0));
    specs.push_back(decay(TestKind::John, -0.3, 0));
}

void add_moment_lemma_checks(std::vector<CheckSpec>& specs) {
    specs.push_back({"fourth_moment_bound", 0, true, [](Context& ctx, CheckResult& r) {
                         double worst = -std::numeric_limits<double>::infinity();
                         bool holds = true;
                         for (int k = 0; k < 20; ++k) {
                             RandomStream stream(ctx.options.seed, StreamPurpose::Verification, 13000 + k);
                             const int p = 2 + k % 4;
                             const Matrix a = standard_normal_matrix(p, p, stream);
                             const FourthMomentCheck c = fourth_moment_bound_check(a, 3 + k % 5, 2000, ctx.seed(13100 + k),
                                                                                   static_cast<int>(ctx.threads));
                             holds = holds && c.holds;
                             worst = std::max(worst, c.lhs.value / c.rhs);
                             ctx.fingerprint.add(c.lhs.value);
                         }
                         r.observed = worst;
                         r.expected = 1.0;
                         r.passed = holds;
                         r.detail = "max E||ZA||^4 / (4N||A^T A||^2 + N^2||A||^4) over 20 random A";
                     }});
    specs.push_back({"trace_concentration_tail", 0, true, [](Context& ctx, CheckResult& r) {
                         const TailCheck big = trace_concentration_tail_check(
                             Matrix::Identity(10, 10), SampleShape::from_N(50, 10), 20000, ctx.seed(14000),
                             static_cast<int>(ctx.threads));
                         const TailCheck scalar = trace_concentration_tail_check(
                             Matrix::Identity(1, 1), SampleShape::from_N(5, 1), 20000, ctx.seed(14001),
                             static_cast<int>(ctx.threads));
                         const double chi = chi_square_cdf(2.5, 5.0);
                         const bool scalar_ok = std::abs(scalar.tail.value - chi) <= 3.0 * scalar.tail.std_error;
                         r.observed = big.tail.value;
                         r.expected = 0.0;
                         r.passed = big.holds && big.tail.value == 0.0 && scalar_ok;
                         r.detail = "N=5,p=1 tail " + fmt(scalar.tail.value) + " vs chi-square " + fmt(chi);
                         ctx.fingerprint.add(scalar.tail.value);
                     }});
    specs.push_back({"inverse_moment_stability", 0, true, [](Context& ctx, CheckResult& r) {
                         std::vector<double> values;
                         std::string detail = "p/N=0.5, q=1, N=40,80,160:";
                         for (int N : {40, 80, 160}) {
                             const McEstimate e = inverse_opnorm_moment_mc(SampleShape::from_N(N, N / 2), 1.0, 2000,
                                                                           ctx.seed(15000 + N), static_cast<int>(ctx.threads));
                             values.push_back(e.value);
                             detail += " " + fmt(e.value);
                             ctx.fingerprint.add(e.value);
                         }
                         const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
                         r.observed = *hi / *lo - 1.0;
                         r.tolerance = 0.25;
                         r.passed = r.observed <= r.tolerance;
                         r.detail = detail;
                     }});
}

void add_reproducibility_check(std::vector<CheckSpec>& specs) {
    specs.push_back({"reproducibility_threads", 11, true, [](Context& ctx, CheckResult& r) {
                         const SampleShape shape = SampleShape::from_N(40, 10);
                         auto run = [&](int threads) {
                             const NullCalibration c =
                                 null_calibrate_mc(TestKind::John, shape, 1000, ctx.seed(16000), threads);
                             const Matrix sigma = build_covariance(CovarianceSpec::spiked(shape.p, {1.0}));
                             const McEstimate e =
                                 empirical_power(TestKind::John, sigma, shape, kAlpha, c, 1000, ctx.seed(16001), threads);
                             const McEstimate v =
                                 dispersion_mc(TestKind::NagaoLedoitWolf, sigma, shape, 300, ctx.seed(16002), threads);
                             return std::array<double, 5>{c.m, c.sigma, e.value, v.value, v.std_error};
                         };
                         const auto a = run(1);
                         const auto b = run(1);
                         const auto c = run(8);
                         r.passed = std::memcmp(a.data(), b.data(), sizeof a) == 0 &&
                                    std::memcmp(a.data(), c.data(), sizeof a) == 0;
                         r.observed = r.passed ? 0.0 : 1.0;
                         r.detail = "calibration, empirical power and dispersion at 1, 1 and 8 threads";
                     }});
}

std::vector<CheckSpec> all_checks() {
    std::vector<CheckSpec> specs;
    add_derivative_checks(specs);
    add_dispersion_checks(specs);
    add_mean_checks(specs);
    add_wishart_checks(specs);
    add_u_matrix_checks(specs);
    add_clt_checks(specs);
    add_power_checks(specs);
    add_size_checks(specs);
    add_ordering_checks(specs);
    add_contiguity_checks(specs);
    add_moment_lemma_checks(specs);
    add_reproducibility_check(specs);
    return specs;
}

bool selected(const VerifyOptions& options, const std::string& name) {
    if (options.only.empty()) return true;
    return std::any_of(options.only.begin(), options.only.end(),
                       [&](const std::string& prefix) { return name.rfind(prefix, 0) == 0; });
}

}  // namespace

bool VerifyReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::vector<std::string> verification_check_names() {
    std::vector<std::string> names;
    for (const auto& spec : all_checks()) names.push_back(spec.name);
    return names;
}

Matrix dense_alternative(TestKind kind, const SampleShape& shape, double target_tau, std::uint64_t seed) {
    RandomStream stream(seed, StreamPurpose::Verification, 0);
    const Matrix g = standard_normal_matrix(shape.p, shape.p, stream);
    Matrix w = (g + g.transpose()) / std::sqrt(2.0 * shape.p);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(w, Eigen::EigenvaluesOnly);
    const double lowest = eig.eigenvalues()(0);
    // Keep I + eps W positive definite: eps < 1 / |lambda_min(W)|.
    double hi = lowest < 0.0 ? 0.95 / -lowest : 10.0;
    double lo = 0.0;
    auto tau = [&](double eps) {
        const Matrix sigma = Matrix::Identity(shape.p, shape.p) + eps * w;
        return analytic_power(kind, sigma, shape, kAlpha).tau;
    };
    if (tau(hi) < target_tau) fail(ErrorCode::BadArgument, "dense direction cannot reach the target mean shift");
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (tau(mid) < target_tau ? lo : hi) = mid;
    }
    return Matrix::Identity(shape.p, shape.p) + 0.5 * (lo + hi) * w;
}

VerifyReport run_verification(const VerifyOptions& options) {
    Context ctx{options, params_for(options.scale), resolve_threads(options.threads), {}, {}, {}};
    VerifyReport report;
    for (const CheckSpec& spec : all_checks()) {
        if (!selected(options, spec.name)) continue;
        CheckResult result;
        result.name = spec.name;
        result.criterion = spec.criterion;
        result.randomized = spec.randomized;
        const auto start = std::chrono::steady_clock::now();
        try {
            spec.run(ctx, result);
        } catch (const std::exception& e) {
            result.passed = false;
            result.detail = std::string("error: ") + e.what();
        }
        result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        ctx.fingerprint.add(result.observed);
        ctx.fingerprint.add(result.expected);
        report.checks.push_back(std::move(result));
    }
    report.fingerprint = ctx.fingerprint.value();
    return report;
}

}  // namespace hdcov
