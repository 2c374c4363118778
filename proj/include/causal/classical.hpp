#pragma once

// Event times as first crossings of phase-space surfaces under a Hamiltonian
// flow, and the resulting causal-order probabilities.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "causal/numerics/rng.hpp"
#include "causal/order.hpp"

namespace causal::classical {

struct PhaseSpacePoint {
    std::vector<double> positions;
    std::vector<double> momenta;

    PhaseSpacePoint() = default;
    PhaseSpacePoint(std::vector<double> x, std::vector<double> p);
    std::size_t dof() const { return positions.size(); }
};

// Codimension-one surface F = 0; the event fires at the first crossing.
struct EventSurface {
    std::function<double(const PhaseSpacePoint&)> F;
    EventId label;
};

// sigma_t: phase-space point at time t of the trajectory through xi at t = 0.
using Flow = std::function<PhaseSpacePoint(const PhaseSpacePoint&, double)>;

class FreeParticleSystem {
public:
    FreeParticleSystem(double mass, std::vector<double> start);

    double mass() const { return mass_; }
    const std::vector<double>& start() const { return start_; }
    std::size_t particles() const { return start_.size(); }

    Flow flow() const;
    // Detector surfaces x_i = 0.
    std::vector<EventSurface> surfaces() const;

private:
    double mass_;
    std::vector<double> start_;
};

struct InitialDensity {
    std::function<PhaseSpacePoint(numerics::SeedStream&)> sample;
    // Optional closed-form weight rho(xi); empty for sample-only densities.
    std::function<double(const PhaseSpacePoint&)> weight;
};

// delta-distribution at a single phase-space point.
InitialDensity point_density(PhaseSpacePoint xi);

// Positions fixed at the system's start coordinates; momenta i.i.d.
// normal(mean, spread).
InitialDensity gaussian_momentum_density(const FreeParticleSystem& system, double mean, double spread);

// Gaussian momenta whose positive fraction is w_plus; at w_plus = 0 or 1 the
// momenta are half-normal of one sign.
InitialDensity density_for_w_plus(const FreeParticleSystem& system, double w_plus, double spread = 1.0);

// -m x / p for p > 0; NoDetection otherwise (the particle never reaches x = 0).
Outcome time_function_free(double x, double p, double mass);

struct RootSearch {
    double horizon = 10.0;
    double step = 1e-2;
    double rel_tol = 1e-12;
};

// First root of F(sigma_t(xi0)) on [0, horizon]: fixed-step scan for a sign
// change (or an exact zero), then bisection. A root that touches zero without
// changing sign between scan points (grazing) is missed and reported as
// NoDetection, so NoDetection here means "none found on [0, horizon]".
Outcome time_function_generic(const Flow& flow, const EventSurface& surface, const PhaseSpacePoint& xi0,
                              const RootSearch& search);

// p(M1) = p(M2) = w - w^2/2, p(M3) = (1 - w)^2, p(M4) = 0 for two particles
// with a common start and momentum distribution whose positive fraction is w.
OrderDistribution order_probabilities_free_analytic(double w_plus);

// Monte Carlo over the initial density with closed-form free-particle times.
OrderDistribution order_probabilities_mc(const FreeParticleSystem& system, const InitialDensity& density,
                                         std::uint64_t n_samples, std::uint64_t seed);

// Monte Carlo for a generic flow; event times come from time_function_generic,
// so null sets are relative to search.horizon.
OrderDistribution order_probabilities_mc(const Flow& flow, std::span<const EventSurface> surfaces,
                                         const InitialDensity& density, const RootSearch& search,
                                         std::uint64_t n_samples, std::uint64_t seed);

}  // namespace causal::classical
