#pragma once

namespace hdcov {

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal quantile; BadArgument outside (0, 1).
double normal_quantile(double prob);

/// Upper-tail critical value z_alpha = quantile(1 - alpha).
double upper_critical_value(double alpha);

/// Chi-square CDF with k degrees of freedom.
double chi_square_cdf(double x, double k);

double digamma(double x);

}  // namespace hdcov
