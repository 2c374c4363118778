#pragma once

#include <cmath>
#include <functional>

#include "causal/errors.hpp"

namespace causal::numerics {

// Bisection on a bracket [a, b] with g(a), g(b) of opposite sign (or one zero).
// Stops when the bracket is narrower than rel_tol * max(1, |x|).
inline double bisect(const std::function<double(double)>& g, double a, double b, double rel_tol = 1e-12) {
    double ga = g(a);
    double gb = g(b);
    if (ga == 0.0) return a;
    if (gb == 0.0) return b;
    if (!std::isfinite(ga) || !std::isfinite(gb)) throw NumericalError("bisect: non-finite bracket values");
    if ((ga < 0.0) == (gb < 0.0)) throw NumericalError("bisect: bracket does not change sign");
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (a + b);
        if (b - a <= rel_tol * std::max(1.0, std::abs(mid))) break;
        const double gm = g(mid);
        if (!std::isfinite(gm)) throw NumericalError("bisect: non-finite value inside bracket");
        if (gm == 0.0) return mid;
        if ((gm < 0.0) == (ga < 0.0)) {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace causal::numerics
