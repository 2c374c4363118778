#pragma once

#include <cstddef>
#include <functional>
#include <limits>

namespace causal::numerics {

struct QuadratureSpec {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    std::size_t max_subdivisions = 2000;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;        // achieved error estimate
    std::size_t evaluations = 0;
    std::size_t subdivisions = 0;
    bool converged = false;

    double tolerance(const QuadratureSpec& spec) const;
};

using Integrand = std::function<double(double)>;

// Globally adaptive Gauss-Kronrod (G10/K21) on a finite interval [a, b].
QuadratureResult integrate(const Integrand& f, double a, double b, const QuadratureSpec& spec = {});

// Integral over [a, inf). Uses x = a + scale * (s / (1 - s))^2 on s in [0, 1), which
// turns power-law tails down to x^{-3/2} into bounded integrands.
QuadratureResult integrate_to_infinity(const Integrand& f, double a, double scale,
                                       const QuadratureSpec& spec = {});

// Integral over the real line, split at `center`.
QuadratureResult integrate_real_line(const Integrand& f, double center, double scale,
                                     const QuadratureSpec& spec = {});

// Composite trapezoid rule for uniformly sampled values.
double trapezoid(const double* y, std::size_t n, double h);

}  // namespace causal::numerics
