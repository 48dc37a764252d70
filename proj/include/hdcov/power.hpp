#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "hdcov/types.hpp"

namespace hdcov {

struct PowerComponents {
    double mean_gap_leading = 0.0;
    double sigma_null = 1.0;
    double alpha = 0.05;
};

struct PowerPrediction {
    TestKind kind = TestKind::LrtIdentity;
    double tau = 0.0;
    double power = 0.0;
    PowerComponents components;
};

/// Leading-order mean shift m_Sigma - m_H0 (before division by sigma).
/// LRT kinds return +inf for singular Sigma.
double mean_gap_leading(TestKind kind, const Matrix& sigma, const SampleShape& shape);

/// 1 - Phi(z_alpha - tau) for tau = gap / sigma_null.
double power_from_tau(double tau, double alpha);

PowerPrediction analytic_power(TestKind kind, const Matrix& sigma, const SampleShape& shape, double alpha,
                               double sigma_null);

/// analytic_power with the asymptotic null sigma.
PowerPrediction analytic_power(TestKind kind, const Matrix& sigma, const SampleShape& shape, double alpha);

/// Closed-form tau for Sigma(a) = diag(1 + a) with the asymptotic sigma.
double spiked_tau(TestKind kind, const std::vector<double>& a, const SampleShape& shape);

/// Closed-form power for Sigma(a) with the asymptotic sigma.
double spiked_power(TestKind kind, const std::vector<double>& a, const SampleShape& shape, double alpha);

enum class Ordering { FirstGreater, Tie, SecondGreater };

struct PowerOrdering {
    /// Empty when p >= N (the LRT kinds are undefined there).
    std::optional<Ordering> lrt_vs_lrts;
    Ordering na_vs_john = Ordering::Tie;
    /// mean(a)^2 - mean(a^2) (1 - (1 + mean(a))^2); positive means Nagao wins.
    double boundary = 0.0;
    std::optional<double> beta_lrt;
    std::optional<double> beta_lrts;
    double beta_na = 0.0;
    double beta_jo = 0.0;
};

PowerOrdering power_ordering(const std::vector<double>& a, const SampleShape& shape, double alpha);

std::string_view to_string(Ordering ordering);

}  // namespace hdcov
