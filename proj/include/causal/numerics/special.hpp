#pragma once

#include <cmath>
#include <numbers>

namespace causal::numerics {

inline double erf(double x) { return std::erf(x); }

inline double erfc(double x) { return std::erfc(x); }

// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Inverse of normal_cdf by bisection; adequate for parameter setup, not hot loops.
double normal_quantile(double p);

}  // namespace causal::numerics
