#pragma once

// First-passage statistics of Brownian particles started at x = -L and the
// causal order of their first crossings of x = 0.

#include <cstdint>
#include <vector>

#include "causal/numerics/quadrature.hpp"
#include "causal/numerics/rng.hpp"
#include "causal/order.hpp"

namespace causal::wiener {

struct DiffusionSpec {
    double D = 1.0;  // diffusion constant, length^2 / time
    double L = 1.0;  // start distance to the line
    void validate() const;
};

// `half_mass`: density L/(2t) (2 pi D t)^{-1/2} exp(-L^2 / 2Dt), with
// no-crossing probability 1/2. `standard`: reflection-principle density, twice
// the former, total mass 1.
enum class DensityBackend { half_mass, standard };

double first_passage_density_half_mass(double t, const DiffusionSpec& spec);
double first_passage_density_standard(double t, const DiffusionSpec& spec);
double first_passage_density(double t, const DiffusionSpec& spec, DensityBackend backend);

// P(first crossing <= t) for the standard density: erfc(L / sqrt(2 D t)).
double first_passage_cdf_standard(double t, const DiffusionSpec& spec);

// Closed-form order probabilities for the half-mass density, equal start distances:
// p(M1) = atan(sqrt(D1/D2)) / 2 pi + 1/4, p(M2) likewise, p(M3) = 1/4.
OrderDistribution order_probabilities_analytic(double D1, double D2);
// Same with unequal start distances; the arctan argument becomes (L2/L1) sqrt(D1/D2).
OrderDistribution order_probabilities_analytic(const DiffusionSpec& p1, const DiffusionSpec& p2,
                                               DensityBackend backend = DensityBackend::half_mass);

struct QuadratureReport {
    OrderDistribution distribution;
    double mass1 = 0.0;  // integral of f1 over (0, inf)
    double mass2 = 0.0;
    double error = 0.0;  // accumulated quadrature error estimate
};

// p(M1) = int_{t1 < t2} f1 f2 + m1 (1 - m2), with the double integral done as
// nested adaptive quadrature. Throws NumericalError on non-convergence.
QuadratureReport order_probabilities_quadrature(const DiffusionSpec& p1, const DiffusionSpec& p2,
                                                DensityBackend backend = DensityBackend::half_mass,
                                                const numerics::QuadratureSpec& spec = {1e-11, 1e-10, 4000});
OrderDistribution order_probabilities_quadrature(double D1, double D2);

struct PathSamplerConfig {
    double horizon = 10.0;
    double dt = 1e-3;
    bool bridge_correction = true;
    std::uint64_t seed = 1;
    void validate() const;
};

// One Euler-Maruyama path x_{n+1} = x_n + sqrt(D dt) xi_n from x_0 = -L. A step
// that lands at x >= 0 crosses at the linearly interpolated time. With the
// bridge correction, a step between two negative points also crosses with the
// Brownian-bridge probability exp(-2 x_n x_{n+1} / (D dt)), at a uniform time
// inside the step. NoDetection if nothing crosses by the horizon.
Outcome sample_first_passage(const DiffusionSpec& spec, const PathSamplerConfig& cfg, numerics::SeedStream& normals,
                             numerics::SeedStream& uniforms);

// Convenience single draw from (cfg.seed, stream 0/1).
Outcome sample_first_passage_mc(const DiffusionSpec& spec, const PathSamplerConfig& cfg);

// n independent first-passage draws, chunked over seed streams.
std::vector<Outcome> sample_first_passages(const DiffusionSpec& spec, const PathSamplerConfig& cfg, std::uint64_t n,
                                           std::uint64_t particle = 0);

struct MonteCarloReport {
    OrderDistribution distribution;
    double horizon = 0.0;  // NoDetection means "not crossed by this time"
};

// Two independent path samplers classified into causal orders.
MonteCarloReport order_probabilities_mc(const DiffusionSpec& p1, const DiffusionSpec& p2, const PathSamplerConfig& cfg,
                                        std::uint64_t n_samples);

}  // namespace causal::wiener
