#include <algorithm>
#include <cmath>
#include <random>

#include "causal/errors.hpp"
#include "causal/numerics/quadrature.hpp"
#include "causal/wiener.hpp"
#include "doctest.h"

using namespace causal;
using namespace causal::wiener;

namespace {

void check_close(const OrderDistribution& a, const OrderDistribution& b, double tol) {
    for (const auto& o : {two_event::m1(), two_event::m2(), two_event::m3(), two_event::m4()})
        CHECK(std::abs(a.probability(o) - b.probability(o)) <= tol);
}

}  // namespace

TEST_CASE("half-mass density: half mass, mode, small-t suppression") {
    DiffusionSpec s{1.7, 0.8};
    numerics::QuadratureSpec q{1e-12, 1e-12, 2000};
    auto mass = numerics::integrate_to_infinity([&](double t) { return first_passage_density_half_mass(t, s); }, 0.0,
                                                s.L * s.L / s.D, q);
    CHECK(std::abs(mass.value - 0.5) <= 1e-6);

    // d/dt log f = -3/(2t) + L^2/(2 D t^2) vanishes at t = L^2 / (3D).
    const double mode = s.L * s.L / (3.0 * s.D);
    const double h = 1e-6;
    auto slope = [&](double t) { return (first_passage_density_half_mass(t + h, s) - first_passage_density_half_mass(t - h, s)) / (2 * h); };
    CHECK(slope(0.9 * mode) > 0.0);
    CHECK(slope(1.1 * mode) < 0.0);
    CHECK(std::abs(slope(mode)) < 1e-6 * first_passage_density_half_mass(mode, s) / mode);

    CHECK(first_passage_density_half_mass(1e-3, {1.0, 1.0}) < 1e-200);
    CHECK(first_passage_density_standard(0.4, s) == doctest::Approx(2.0 * first_passage_density_half_mass(0.4, s)));
    CHECK_THROWS_AS(first_passage_density_half_mass(0.0, s), ParameterError);
    CHECK_THROWS_AS(first_passage_density_half_mass(1.0, {-1.0, 1.0}), ParameterError);
}

TEST_CASE("analytic order probabilities") {
    auto eq = order_probabilities_analytic(2.0, 2.0);
    CHECK(eq.probability(two_event::m1()) == 0.375);
    CHECK(eq.probability(two_event::m2()) == 0.375);
    CHECK(eq.probability(two_event::m3()) == 0.25);

    auto lim = order_probabilities_analytic(1e14, 1.0);
    CHECK(std::abs(lim.probability(two_event::m1()) - 0.5) < 1e-6);
    CHECK(std::abs(lim.probability(two_event::m2()) - 0.25) < 1e-6);

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> lg(-2.0, 2.0);
    for (int i = 0; i < 100; ++i) {
        auto d = order_probabilities_analytic(std::pow(10.0, lg(rng)), std::pow(10.0, lg(rng)));
        CHECK(std::abs(d.total() - 1.0) <= 1e-12);
    }
    CHECK_THROWS_AS(order_probabilities_analytic(0.0, 1.0), ParameterError);

    // The general form reduces to the D-only formula for equal distances.
    check_close(order_probabilities_analytic({3.0, 2.0}, {0.5, 2.0}), order_probabilities_analytic(3.0, 0.5), 1e-15);
}

TEST_CASE("quadrature reproduces the analytic result") {
    auto q = order_probabilities_quadrature(DiffusionSpec{1.0, 1.0}, DiffusionSpec{1.0, 1.0});
    CHECK(std::abs(q.distribution.probability(two_event::m1()) - 0.375) <= 1e-6);
    CHECK(std::abs(q.distribution.probability(two_event::m2()) - 0.375) <= 1e-6);
    CHECK(std::abs(q.distribution.probability(two_event::m3()) - 0.25) <= 1e-6);
    CHECK(std::abs(q.distribution.probability(two_event::m1()) - q.distribution.probability(two_event::m2())) <= 1e-9);
    CHECK(std::abs(q.mass1 - 0.5) <= 1e-9);

    check_close(order_probabilities_quadrature(4.0, 1.0), order_probabilities_analytic(4.0, 1.0), 1e-6);

    for (double e = -2.0; e <= 2.0; e += 0.5) {
        const double ratio = std::pow(10.0, e);
        check_close(order_probabilities_quadrature(ratio, 1.0), order_probabilities_analytic(ratio, 1.0), 1e-6);
    }
}

TEST_CASE("quadrature: unequal distances and the standard backend") {
    DiffusionSpec a{0.7, 1.5}, b{2.0, 0.6};
    check_close(order_probabilities_quadrature(a, b).distribution, order_probabilities_analytic(a, b), 1e-6);
    auto std_q = order_probabilities_quadrature(a, b, DensityBackend::standard);
    check_close(std_q.distribution, order_probabilities_analytic(a, b, DensityBackend::standard), 1e-6);
    CHECK(std::abs(std_q.mass1 - 1.0) <= 1e-9);
    CHECK(std::abs(std_q.distribution.probability(two_event::m3())) <= 1e-9);
}

TEST_CASE("exchange symmetry is exact") {
    DiffusionSpec a{0.3, 1.2}, b{1.9, 0.9};
    auto ab = order_probabilities_quadrature(a, b).distribution;
    auto ba = order_probabilities_quadrature(b, a).distribution;
    CHECK(ab.probability(two_event::m1()) == ba.probability(two_event::m2()));
    CHECK(ab.probability(two_event::m2()) == ba.probability(two_event::m1()));
    auto xab = order_probabilities_analytic(a, b);
    auto xba = order_probabilities_analytic(b, a);
    CHECK(xab.probability(two_event::m1()) == xba.probability(two_event::m2()));
}

TEST_CASE("path sampler: KS test against the reflection-principle density") {
    DiffusionSpec s{1.0, 1.0};
    PathSamplerConfig cfg{3.0, 2e-3, true, 77};
    const std::uint64_t n = 100000;
    auto draws = sample_first_passages(s, cfg, n);
    std::vector<double> times;
    for (const auto& o : draws)
        if (o.detected()) times.push_back(o.time());
    std::sort(times.begin(), times.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double F = first_passage_cdf_standard(times[i], s);
        ks = std::max({ks, std::abs((i + 1.0) / n - F), std::abs(static_cast<double>(i) / n - F)});
    }
    ks = std::max(ks, std::abs(static_cast<double>(times.size()) / n - first_passage_cdf_standard(cfg.horizon, s)));
    // Critical value at the 1% level.
    CHECK(ks < 1.628 / std::sqrt(static_cast<double>(n)));
    MESSAGE("KS distance " << ks);
}

TEST_CASE("bridge correction only adds crossings") {
    DiffusionSpec s{1.0, 1.0};
    const std::uint64_t n = 20000;
    PathSamplerConfig coarse{1.0, 0.05, false, 9};
    PathSamplerConfig bridged = coarse;
    bridged.bridge_correction = true;
    auto frac = [&](const PathSamplerConfig& c) {
        auto d = sample_first_passages(s, c, n);
        return std::count_if(d.begin(), d.end(), [](const Outcome& o) { return o.detected(); }) / double(n);
    };
    const double f0 = frac(coarse), f1 = frac(bridged);
    const double sigma = std::sqrt(2.0 * 0.25 / n);
    CHECK(f1 - f0 > 3.0 * sigma);
    CHECK(std::abs(f1 - first_passage_cdf_standard(1.0, s)) < 4.0 * std::sqrt(0.25 / n));
}

TEST_CASE("tiny horizon almost never crosses; draws are reproducible") {
    DiffusionSpec s{1.0, 1.0};
    PathSamplerConfig cfg{1e-3, 1e-4, true, 3};
    auto d = sample_first_passages(s, cfg, 1000);
    CHECK(std::none_of(d.begin(), d.end(), [](const Outcome& o) { return o.detected(); }));

    PathSamplerConfig c2{5.0, 1e-3, true, 21};
    CHECK(sample_first_passage_mc(s, c2) == sample_first_passage_mc(s, c2));
    CHECK_THROWS_AS(sample_first_passage_mc(s, PathSamplerConfig{1.0, 2.0, true, 1}), ParameterError);
}

TEST_CASE("Monte Carlo orders follow the faster diffuser") {
    PathSamplerConfig cfg{20.0, 5e-3, true, 4};
    auto mc = order_probabilities_mc({3.0, 1.0}, {1.0, 1.0}, cfg, 20000);
    const auto& d = mc.distribution;
    const double diff = d.probability(two_event::m1()) - d.probability(two_event::m2());
    const double se = std::hypot(*d.std_error(two_event::m1()), *d.std_error(two_event::m2()));
    CHECK(diff > 3.0 * se);
    CHECK(mc.horizon == 20.0);
    // With the standard density, finite-horizon truth is computable: compare p(M3).
    const double s1 = 1.0 - first_passage_cdf_standard(20.0, {3.0, 1.0});
    const double s2 = 1.0 - first_passage_cdf_standard(20.0, {1.0, 1.0});
    CHECK(std::abs(d.probability(two_event::m3()) - s1 * s2) < 4.0 * std::sqrt(s1 * s2 / 20000));
}
