#include "causal/wiener.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "causal/errors.hpp"
#include "causal/numerics/chunked.hpp"

namespace causal::wiener {

void DiffusionSpec::validate() const {
    require(std::isfinite(D) && D > 0.0, "diffusion constant must be positive");
    require(std::isfinite(L) && L > 0.0, "start distance must be positive");
}

void PathSamplerConfig::validate() const {
    require(std::isfinite(horizon) && horizon > 0.0, "sampler horizon must be positive");
    require(std::isfinite(dt) && dt > 0.0 && dt <= horizon, "sampler step must satisfy 0 < dt <= horizon");
}

double first_passage_density_half_mass(double t, const DiffusionSpec& spec) {
    spec.validate();
    require(t > 0.0, "first-passage density is defined for t > 0");
    const double Dt = spec.D * t;
    return 1.0 / std::sqrt(2.0 * std::numbers::pi * Dt) * (spec.L / (2.0 * t)) * std::exp(-spec.L * spec.L / (2.0 * Dt));
}

double first_passage_density_standard(double t, const DiffusionSpec& spec) {
    spec.validate();
    require(t > 0.0, "first-passage density is defined for t > 0");
    return spec.L / std::sqrt(2.0 * std::numbers::pi * spec.D * t * t * t) * std::exp(-spec.L * spec.L / (2.0 * spec.D * t));
}

double first_passage_density(double t, const DiffusionSpec& spec, DensityBackend backend) {
    return backend == DensityBackend::half_mass ? first_passage_density_half_mass(t, spec)
                                            : first_passage_density_standard(t, spec);
}

double first_passage_cdf_standard(double t, const DiffusionSpec& spec) {
    spec.validate();
    if (t <= 0.0) return 0.0;
    return std::erfc(spec.L / std::sqrt(2.0 * spec.D * t));
}

namespace {

double crossing_mass(DensityBackend backend) { return backend == DensityBackend::half_mass ? 0.5 : 1.0; }

OrderDistribution two_event_distribution(double p1, double p2, double p3) {
    OrderDistribution d;
    d.set(two_event::m1(), p1);
    d.set(two_event::m2(), p2);
    d.set(two_event::m3(), p3);
    d.set(two_event::m4(), 0.0);
    return d;
}

}  // namespace

OrderDistribution order_probabilities_analytic(double D1, double D2) {
    require(D1 > 0.0 && D2 > 0.0, "diffusion constants must be positive");
    const double inv2pi = 0.5 / std::numbers::pi;
    return two_event_distribution(std::atan(std::sqrt(D1 / D2)) * inv2pi + 0.25,
                                  std::atan(std::sqrt(D2 / D1)) * inv2pi + 0.25, 0.25);
}

OrderDistribution order_probabilities_analytic(const DiffusionSpec& p1, const DiffusionSpec& p2, DensityBackend backend) {
    p1.validate();
    p2.validate();
    // T_i = L_i^2 / (D_i Z_i^2) for standard normals Z_i, so given both cross,
    // P(T1 < T2) = (2/pi) atan((L2/L1) sqrt(D1/D2)).
    const double r12 = (p2.L / p1.L) * std::sqrt(p1.D / p2.D);
    const double r21 = (p1.L / p2.L) * std::sqrt(p2.D / p1.D);
    const double m = crossing_mass(backend);
    const double both = m * m * 2.0 / std::numbers::pi;
    return two_event_distribution(both * std::atan(r12) + m * (1.0 - m), both * std::atan(r21) + m * (1.0 - m),
                                  (1.0 - m) * (1.0 - m));
}

QuadratureReport order_probabilities_quadrature(const DiffusionSpec& p1, const DiffusionSpec& p2,
                                                DensityBackend backend, const numerics::QuadratureSpec& spec) {
    p1.validate();
    p2.validate();
    auto f1 = [&](double t) { return t <= 0.0 ? 0.0 : first_passage_density(t, p1, backend); };
    auto f2 = [&](double t) { return t <= 0.0 ? 0.0 : first_passage_density(t, p2, backend); };
    const double scale1 = p1.L * p1.L / p1.D;
    const double scale2 = p2.L * p2.L / p2.D;

    auto check = [](const numerics::QuadratureResult& r, const char* what) {
        if (!r.converged)
            throw NumericalError(std::string("quadrature did not converge for ") + what + ": value " +
                                 std::to_string(r.value) + ", error " + std::to_string(r.error) + " after " +
                                 std::to_string(r.subdivisions) + " subdivisions");
    };

    const auto mass1 = numerics::integrate_to_infinity(f1, 0.0, scale1, spec);
    check(mass1, "mass of f1");
    const auto mass2 = numerics::integrate_to_infinity(f2, 0.0, scale2, spec);
    check(mass2, "mass of f2");

    double inner_err = 0.0;
    // int_0^inf dt_a f_a(t_a) int_{t_a}^inf dt_b f_b(t_b)
    auto ordered = [&](auto& fa, auto& fb, double scale_a, double scale_b) {
        auto outer = [&](double ta) {
            const double wa = fa(ta);
            if (wa == 0.0) return 0.0;
            const auto tail = numerics::integrate_to_infinity(fb, ta, std::max(scale_b, ta), spec);
            check(tail, "inner survival integral");
            inner_err = std::max(inner_err, tail.error);
            return wa * tail.value;
        };
        const auto r = numerics::integrate_to_infinity(outer, 0.0, scale_a, spec);
        check(r, "ordered double integral");
        return r;
    };
    const auto i12 = ordered(f1, f2, scale1, scale2);
    const auto i21 = ordered(f2, f1, scale2, scale1);

    QuadratureReport out;
    out.mass1 = mass1.value;
    out.mass2 = mass2.value;
    const double q1 = 1.0 - mass1.value, q2 = 1.0 - mass2.value;
    out.distribution =
        two_event_distribution(std::clamp(i12.value + mass1.value * q2, 0.0, 1.0),
                               std::clamp(i21.value + mass2.value * q1, 0.0, 1.0), std::clamp(q1 * q2, 0.0, 1.0));
    out.error = i12.error + i21.error + inner_err * (mass1.value + mass2.value) + 2.0 * (mass1.error + mass2.error);
    return out;
}

OrderDistribution order_probabilities_quadrature(double D1, double D2) {
    return order_probabilities_quadrature(DiffusionSpec{D1, 1.0}, DiffusionSpec{D2, 1.0}).distribution;
}

Outcome sample_first_passage(const DiffusionSpec& spec, const PathSamplerConfig& cfg, numerics::SeedStream& normals,
                             numerics::SeedStream& uniforms) {
    double x = -spec.L;
    double t = 0.0;
    while (t < cfg.horizon) {
        const double h = std::min(cfg.dt, cfg.horizon - t);
        const double var = spec.D * h;
        const double next = x + std::sqrt(var) * normals.normal();
        if (next >= 0.0) return Outcome::at(t + h * (-x) / (next - x));
        if (cfg.bridge_correction) {
            const double p_cross = std::exp(-2.0 * x * next / var);
            if (uniforms.uniform() < p_cross) return Outcome::at(t + h * uniforms.uniform());
        }
        x = next;
        t += h;
    }
    return Outcome::none();
}

Outcome sample_first_passage_mc(const DiffusionSpec& spec, const PathSamplerConfig& cfg) {
    spec.validate();
    cfg.validate();
    numerics::SeedStream normals(cfg.seed, 0), uniforms(cfg.seed, 1);
    return sample_first_passage(spec, cfg, normals, uniforms);
}

std::vector<Outcome> sample_first_passages(const DiffusionSpec& spec, const PathSamplerConfig& cfg, std::uint64_t n,
                                           std::uint64_t particle) {
    spec.validate();
    cfg.validate();
    require(n >= 1, "need at least one sample");
    std::vector<Outcome> out(n);
    numerics::run_chunked<int>(
        n, numerics::kDefaultChunk,
        [&](std::size_t chunk, std::size_t begin, std::size_t end) {
            const std::uint64_t base = (particle << 40) | (2 * static_cast<std::uint64_t>(chunk));
            numerics::SeedStream normals(cfg.seed, base), uniforms(cfg.seed, base + 1);
            for (std::size_t i = begin; i < end; ++i) out[i] = sample_first_passage(spec, cfg, normals, uniforms);
            return 0;
        },
        [](int&, int) {});
    return out;
}

MonteCarloReport order_probabilities_mc(const DiffusionSpec& p1, const DiffusionSpec& p2, const PathSamplerConfig& cfg,
                                        std::uint64_t n_samples) {
    const auto t1 = sample_first_passages(p1, cfg, n_samples, 0);
    const auto t2 = sample_first_passages(p2, cfg, n_samples, 1);
    OrderCounter counter;
    for (std::uint64_t i = 0; i < n_samples; ++i) counter.add(std::vector<Outcome>{t1[i], t2[i]});
    return {counter.distribution(), cfg.horizon};
}

}  // namespace causal::wiener
