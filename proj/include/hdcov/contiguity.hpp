#pragma once

#include <cstdint>
#include <optional>

#include "hdcov/estimate.hpp"
#include "hdcov/types.hpp"

namespace hdcov {

/// grad T(Z Sigma^{1/2} + 1 mu^T) Sigma^{1/2} for an N x p matrix Z.
Matrix tmap(TestKind kind, const Matrix& sigma, const Vector& mu, const Matrix& z);

/// tmap with mu = 0 and a precomputed Sigma^{1/2}.
Matrix tmap_with_root(TestKind kind, const Matrix& sigma_root, const Matrix& z);

/// Reference covariance for the null: I for identity tests. For sphericity
/// tests the map is invariant under Sigma -> c Sigma, so every lambda I gives
/// the same map and I attains the infimum over the composite null.
/// Monte Carlo estimate of E ||tmap_Sigma(Z) - tmap_I(Z)||_F^2 with common Z.
McEstimate dispersion_mc(TestKind kind, const Matrix& sigma, const SampleShape& shape, int reps,
                         std::uint64_t seed, std::optional<int> threads = std::nullopt);

/// N ||Sigma - I||_F^2.
double dispersion_closed_lrt(const Matrix& sigma, int N);

struct MeanGap {
    double leading = 0.0;
    /// Bracketed residual Q: exact for nagao, a unit-constant bound shape for
    /// the sphericity kinds, zero for lrt.
    double residual = 0.0;
    /// Residual on the scale of the gap: (N/4) Q or (N/2) Q.
    double residual_gap = 0.0;
    /// True when leading + residual_gap is the exact mean difference.
    bool exact = false;

    double gap() const { return exact ? leading + residual_gap : leading; }
};

MeanGap mean_gap_with_residual(TestKind kind, const Matrix& sigma, const SampleShape& shape);

/// V / max(|gap|, sigma_null).
double err_bar(double V, double mean_gap, double sigma_null);

struct BoundTerms {
    double thm21 = 0.0;
    double cor22 = 0.0;
};

/// err_null + ((1 + |t|) err_bar)^{2/3} and err_null + err_bar^{4/9}, with
/// unit constants.
BoundTerms bound_terms(double err_null, double err_bar, double t);

struct ContiguityReport {
    TestKind kind = TestKind::LrtIdentity;
    double V = 0.0;
    double V_std_error = 0.0;
    bool V_closed_form = false;
    double mean_gap = 0.0;
    double sigma_null = 1.0;
    double err_bar = 0.0;
    double bound_term_49 = 0.0;
    double residual_bound = 0.0;

    double bound_term_23(double t) const;
};

struct ContiguityOptions {
    int reps = 500;
    std::uint64_t seed = 0;
    std::optional<int> threads;
    /// Use N ||Sigma - I||_F^2 for lrt instead of simulating.
    bool lrt_closed_form = true;
};

ContiguityReport contiguity_report(TestKind kind, const Matrix& sigma, const SampleShape& shape, double sigma_null,
                                   const ContiguityOptions& options);

}  // namespace hdcov
