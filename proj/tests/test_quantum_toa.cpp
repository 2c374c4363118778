#include <cmath>
#include <numbers>
#include <random>

#include "causal/errors.hpp"
#include "causal/quantum_toa.hpp"
#include "doctest.h"

using namespace causal;
using namespace causal::toa;

namespace {

// Closed forms of the Gaussian-erf convolutions:
// int e^{-(y-a)^2} erf(y) dy = sqrt(pi) erf(a / sqrt2).
double q1_closed(double d) { return 0.5 * std::erf(d); }
double q2_closed(double d) { return 0.5 * std::exp(-0.5 * d * d) * std::erf(0.5 * d); }

double eeee(double d, double ratio) {
    const double c = std::cos(ratio * d);
    return (q1_closed(d) + 2.0 * q2_closed(d) * c) / (2.0 * (1.0 + std::exp(-0.5 * d * d) * c));
}

}  // namespace

TEST_CASE("q1 and q2 against their closed forms") {
    CHECK(std::abs(q1(0.0)) <= 1e-12);
    CHECK(std::abs(q2(0.0)) <= 1e-12);
    CHECK(std::abs(q1(4.0) - 0.5) <= 1e-3);
    CHECK(std::abs(q1(-4.0) + 0.5) <= 1e-3);
    CHECK(std::abs(q2(8.0)) < 1e-6);
    for (double d = -6.0; d <= 6.0; d += 0.25) {
        CHECK(std::abs(q1(d) - q1_closed(d)) <= 1e-10);
        CHECK(std::abs(q2(d) - q2_closed(d)) <= 1e-10);
    }
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 50; ++i) {
        const double d = u(rng);
        CHECK(std::abs(q1(d) + q1(-d)) <= 1e-10);
        CHECK(std::abs(q2(d) + q2(-d)) <= 1e-10);
    }
    CHECK(q1(0.7) == -q1(-0.7));
    CHECK_THROWS_AS(q1(std::numeric_limits<double>::infinity()), ParameterError);
}

TEST_CASE("q1 is strictly increasing") {
    double prev = q1(-5.0);
    for (double d = -4.95; d <= 5.0; d += 0.05) {
        const double v = q1(d);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("asymmetry of two plain packets") {
    GaussianWavepacket a{10.0, 1.0, 20.0}, b = a;
    auto same = asymmetry_simple(a, b);
    CHECK(same.w == 0.0);
    CHECK(same.distribution.probability(two_event::m1()) == 0.5);
    CHECK(same.distribution.probability(two_event::m3()) == 0.0);

    b.L = 24.0;
    auto far = asymmetry_simple(a, b);
    CHECK(std::abs(far.w - 0.5) <= 1e-3);
    CHECK(far.distribution.total() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(asymmetry_simple(b, a).w == -far.w);

    b.sigma = 2.0;
    CHECK_THROWS_AS(asymmetry_simple(a, b), ParameterError);
    GaussianWavepacket wide{2.0, 1.0, 5.0};
    CHECK_FALSE(asymmetry_simple(wide, wide).warnings.empty());
}

TEST_CASE("superposition asymmetry") {
    SuperpositionSpec s{{10.0, 1.0, 20.0}, 0.0};
    CHECK(asymmetry_superposition(s).w == 0.0);

    // 2 pi periodicity in k0/sigma at fixed delta = 1.
    for (double u = 5.0; u <= 30.0; u += 0.7) {
        SuperpositionSpec a{{u, 1.0, 20.0}, 1.0}, b{{u + 2.0 * std::numbers::pi, 1.0, 20.0}, 1.0};
        CHECK(std::abs(asymmetry_superposition(a).w - asymmetry_superposition(b).w) <= 1e-9);
        CHECK(std::abs(asymmetry_superposition(a).w - eeee(1.0, u)) <= 1e-10);
    }

    // Where the cosine vanishes, w = q1 / 2.
    const double delta = 0.8;
    SuperpositionSpec quarter{{std::numbers::pi / (2.0 * delta), 1.0, 20.0}, delta};
    CHECK(std::abs(asymmetry_superposition(quarter).w - 0.5 * q1(delta)) <= 1e-12);

    // The interference term swings w around the half-weight baseline q1(1)/2.
    int above = 0, below = 0;
    for (double u = 5.0; u <= 30.0; u += 0.05) {
        const double w = asymmetry_superposition({{u, 1.0, 20.0}, 1.0}).w;
        (w > 0.5 * q1(1.0) ? above : below)++;
    }
    CHECK(above > 0);
    CHECK(below > 0);

    // |w| <= 1/2 over delta in [-5, 5] at k0/sigma = 10.
    for (double d = -5.0; d <= 5.0; d += 0.01) {
        auto r = asymmetry_superposition({{10.0, 1.0, 20.0}, d});
        CHECK(std::abs(r.w) <= 0.5);
    }
}

TEST_CASE("degenerate superposition") {
    // nu = -1 needs sigma ell -> 0 with cos(k0 ell) = -1, which the envelope
    // prevents exactly; the guard is on the normalization only.
    SuperpositionSpec s{{10.0, 1e-9, 20.0}, std::numbers::pi / 10.0};
    CHECK_THROWS_AS(superposition_amplitude(s), NumericalError);
}

TEST_CASE("arrival density: normalization, peak and translation") {
    GaussianWavepacket pkt{10.0, 1.0, 20.0};
    auto amp = gaussian_amplitude(pkt);
    CHECK(std::abs(amp.norm() - 1.0) < 1e-10);
    auto curve = toa_curve(amp);
    CHECK(std::abs(curve.mass - 1.0) <= 1e-3);
    CHECK(curve.warnings.empty());

    std::size_t peak = 0;
    for (std::size_t i = 0; i < curve.p.size(); ++i) {
        CHECK(curve.p[i] >= 0.0);
        if (curve.p[i] > curve.p[peak]) peak = i;
    }
    CHECK(std::abs(curve.t[peak] - pkt.L) < 0.05);

    // Shift by a dyadic amount keeps t - L bitwise identical.
    auto shifted = gaussian_amplitude({10.0, 1.0, 22.5});
    for (double t = 15.0; t <= 25.0; t += 0.125) CHECK(toa_density(shifted, t + 2.5) == toa_density(amp, t));

    auto rotated = gaussian_amplitude(pkt, kDefaultMomentumPoints, 1.234);
    for (double t = 17.0; t <= 23.0; t += 0.5)
        CHECK(toa_density(rotated, t) == doctest::Approx(toa_density(amp, t)).epsilon(1e-12));
}

TEST_CASE("arrival density: negative momenta are flagged") {
    auto amp = gaussian_amplitude({4.0, 1.0, 20.0});
    CHECK(amp.nonpositive_fraction() > 1e-6);
    CHECK_FALSE(toa_curve(amp).warnings.empty());
}

TEST_CASE("arrival density: too narrow a window is an error") {
    auto amp = gaussian_amplitude({10.0, 1.0, 20.0});
    TimeGridOptions opts;
    opts.margin = 0.5;
    CHECK_THROWS_AS(toa_curve(amp, opts), NumericalError);
}

TEST_CASE("sampled arrival times reproduce the asymmetry") {
    const std::uint64_t n = 100000;
    SUBCASE("identical packets") {
        auto a = gaussian_amplitude({10.0, 1.0, 20.0});
        auto r = asymmetry_mc(a, a, n, 11);
        CHECK(std::abs(r.w) <= 3.0 * r.std_error);
        CHECK(r.distribution.probability(two_event::m3()) == 0.0);
    }
    SUBCASE("distance offsets") {
        for (double d : {-2.0, -1.0, 1.0, 2.0}) {
            GaussianWavepacket p1{10.0, 1.0, 20.0}, p2{10.0, 1.0, 20.0 + d};
            auto mc = asymmetry_mc(gaussian_amplitude(p1), gaussian_amplitude(p2), n, 12);
            const double exact = asymmetry_simple(p1, p2).w;
            CHECK(std::abs(mc.w - exact) <= 3.0 * mc.std_error);
            MESSAGE("sigma dL = " << d << ": mc " << mc.w << " +- " << mc.std_error << ", closed " << exact);
        }
    }
    SUBCASE("superposition") {
        for (double ratio : {7.0, 10.0}) {
            SuperpositionSpec s{{ratio, 1.0, 20.0}, 1.0};
            auto mc = asymmetry_mc(superposition_amplitude(s), gaussian_amplitude(s.base), n, 13);
            const double exact = asymmetry_superposition(s).w;
            CHECK(std::abs(mc.w - exact) <= 3.0 * mc.std_error);
            MESSAGE("k0/sigma = " << ratio << ": mc " << mc.w << " +- " << mc.std_error << ", closed " << exact);
        }
    }
}

TEST_CASE("Monte Carlo asymmetry is reproducible") {
    auto a = gaussian_amplitude({10.0, 1.0, 20.0});
    auto b = gaussian_amplitude({10.0, 1.0, 20.5});
    CHECK(asymmetry_mc(a, b, 20000, 3).w == asymmetry_mc(a, b, 20000, 3).w);
}
