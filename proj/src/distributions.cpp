#include "hdcov/distributions.hpp"

#include <cmath>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include "hdcov/error.hpp"

namespace hdcov {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double prob) {
    if (!(prob > 0.0 && prob < 1.0)) fail(ErrorCode::BadArgument, "quantile needs a probability in (0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), prob);
}

double upper_critical_value(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::BadArgument, "alpha must lie in (0, 1)");
    return -normal_quantile(alpha);
}

double chi_square_cdf(double x, double k) {
    if (x <= 0.0) return 0.0;
    return boost::math::cdf(boost::math::chi_squared_distribution<double>(k), x);
}

double digamma(double x) { return boost::math::digamma(x); }

}  // namespace hdcov
