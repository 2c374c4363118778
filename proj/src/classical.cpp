#include "causal/classical.hpp"

#include <cmath>

#include "causal/errors.hpp"
#include "causal/numerics/chunked.hpp"
#include "causal/numerics/roots.hpp"
#include "causal/numerics/special.hpp"

namespace causal::classical {

PhaseSpacePoint::PhaseSpacePoint(std::vector<double> x, std::vector<double> p)
    : positions(std::move(x)), momenta(std::move(p)) {
    require(positions.size() == momenta.size(), "phase-space point needs as many momenta as positions");
}

FreeParticleSystem::FreeParticleSystem(double mass, std::vector<double> start) : mass_(mass), start_(std::move(start)) {
    require(mass_ > 0.0, "particle mass must be positive");
    for (double x : start_) require(x <= 0.0, "free particles start at x <= 0");
}

Flow FreeParticleSystem::flow() const {
    const double m = mass_;
    return [m](const PhaseSpacePoint& xi, double t) {
        PhaseSpacePoint out = xi;
        for (std::size_t i = 0; i < out.dof(); ++i) out.positions[i] += xi.momenta[i] * t / m;
        return out;
    };
}

std::vector<EventSurface> FreeParticleSystem::surfaces() const {
    std::vector<EventSurface> s;
    for (std::size_t i = 0; i < start_.size(); ++i)
        s.push_back({[i](const PhaseSpacePoint& xi) { return xi.positions[i]; }, EventId{i}});
    return s;
}

InitialDensity point_density(PhaseSpacePoint xi) {
    InitialDensity d;
    d.sample = [xi](numerics::SeedStream&) { return xi; };
    return d;
}

InitialDensity gaussian_momentum_density(const FreeParticleSystem& system, double mean, double spread) {
    require(spread > 0.0, "momentum spread must be positive");
    const auto start = system.start();
    InitialDensity d;
    d.sample = [start, mean, spread](numerics::SeedStream& s) {
        std::vector<double> p(start.size());
        for (auto& pi : p) pi = mean + spread * s.normal();
        return PhaseSpacePoint(start, std::move(p));
    };
    d.weight = [start, mean, spread](const PhaseSpacePoint& xi) {
        if (xi.positions != start) return 0.0;
        double w = 1.0;
        for (double p : xi.momenta) {
            const double z = (p - mean) / spread;
            w *= std::exp(-0.5 * z * z) / (spread * std::sqrt(2.0 * std::numbers::pi));
        }
        return w;
    };
    return d;
}

InitialDensity density_for_w_plus(const FreeParticleSystem& system, double w_plus, double spread) {
    require(w_plus >= 0.0 && w_plus <= 1.0, "w_plus must lie in [0, 1]");
    if (w_plus > 0.0 && w_plus < 1.0) {
        // P(p > 0) = Phi(mean / spread).
        return gaussian_momentum_density(system, spread * numerics::normal_quantile(w_plus), spread);
    }
    // Endpoints: half-normal momenta, all of one sign.
    require(spread > 0.0, "momentum spread must be positive");
    const double sign = w_plus == 1.0 ? 1.0 : -1.0;
    const auto start = system.start();
    InitialDensity d;
    d.sample = [start, sign, spread](numerics::SeedStream& s) {
        std::vector<double> p(start.size());
        for (auto& pi : p) pi = sign * spread * std::abs(s.normal());
        return PhaseSpacePoint(start, std::move(p));
    };
    return d;
}

Outcome time_function_free(double x, double p, double mass) {
    require(mass > 0.0, "particle mass must be positive");
    require(x <= 0.0, "free particle must start at x <= 0");
    if (x == 0.0) return Outcome::at(0.0);
    if (p <= 0.0) return Outcome::none();
    return Outcome::at(-mass * x / p);
}

Outcome time_function_generic(const Flow& flow, const EventSurface& surface, const PhaseSpacePoint& xi0,
                              const RootSearch& search) {
    require(search.horizon > 0.0 && search.step > 0.0, "root search needs positive horizon and step");
    auto g = [&](double t) {
        const double v = surface.F(flow(xi0, t));
        if (!std::isfinite(v)) throw NumericalError("event surface function is not finite at t = " + std::to_string(t));
        return v;
    };
    double prev_t = 0.0;
    double prev = g(0.0);
    if (prev == 0.0) return Outcome::at(0.0);
    const auto steps = static_cast<std::uint64_t>(std::ceil(search.horizon / search.step));
    for (std::uint64_t k = 1; k <= steps; ++k) {
        const double t = std::min(search.horizon, static_cast<double>(k) * search.step);
        const double v = g(t);
        if (v == 0.0) return Outcome::at(t);
        if ((v < 0.0) != (prev < 0.0)) return Outcome::at(numerics::bisect(g, prev_t, t, search.rel_tol));
        prev_t = t;
        prev = v;
    }
    return Outcome::none();
}

OrderDistribution order_probabilities_free_analytic(double w_plus) {
    require(w_plus >= 0.0 && w_plus <= 1.0, "w_plus must lie in [0, 1]");
    OrderDistribution d;
    const double crossing_first = w_plus - 0.5 * w_plus * w_plus;
    d.set(two_event::m1(), crossing_first);
    d.set(two_event::m2(), crossing_first);
    d.set(two_event::m3(), (1.0 - w_plus) * (1.0 - w_plus));
    d.set(two_event::m4(), 0.0);
    return d;
}

namespace {

template <class TimesOf>
OrderDistribution run_mc(const InitialDensity& density, std::uint64_t n_samples, std::uint64_t seed, TimesOf&& times_of) {
    require(n_samples >= 1, "need at least one Monte Carlo sample");
    require(static_cast<bool>(density.sample), "initial density has no sampler");
    auto body = [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        numerics::SeedStream stream(seed, chunk);
        OrderCounter counter;
        for (std::size_t i = begin; i < end; ++i) counter.add(times_of(density.sample(stream)));
        return counter;
    };
    auto merged = numerics::run_chunked<OrderCounter>(n_samples, numerics::kDefaultChunk, body,
                                                      [](OrderCounter& acc, const OrderCounter& p) { acc.merge(p); });
    return merged.distribution();
}

}  // namespace

OrderDistribution order_probabilities_mc(const FreeParticleSystem& system, const InitialDensity& density,
                                         std::uint64_t n_samples, std::uint64_t seed) {
    const double m = system.mass();
    const std::size_t n = system.particles();
    return run_mc(density, n_samples, seed, [m, n](const PhaseSpacePoint& xi) {
        require(xi.dof() == n, "sampled phase-space point has the wrong dimension");
        OutcomeVector v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = time_function_free(xi.positions[i], xi.momenta[i], m);
        return v;
    });
}

OrderDistribution order_probabilities_mc(const Flow& flow, std::span<const EventSurface> surfaces,
                                         const InitialDensity& density, const RootSearch& search,
                                         std::uint64_t n_samples, std::uint64_t seed) {
    return run_mc(density, n_samples, seed, [&](const PhaseSpacePoint& xi) {
        OutcomeVector v(surfaces.size());
        for (std::size_t i = 0; i < surfaces.size(); ++i) v[i] = time_function_generic(flow, surfaces[i], xi, search);
        return v;
    });
}

}  // namespace causal::classical
