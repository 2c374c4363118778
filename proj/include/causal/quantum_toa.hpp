#pragma once

// Time-of-arrival detection of massless particles with ideal detectors, and
// the order asymmetry w = p(M1) - 1/2 of two such detections.

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "causal/numerics/quadrature.hpp"
#include "causal/order.hpp"

namespace causal::toa {

struct GaussianWavepacket {
    double k0 = 10.0;    // mean momentum
    double sigma = 1.0;  // momentum spread
    double L = 10.0;     // source-detector distance
    void validate() const;
    // Below k0/sigma = 3 a visible part of the packet has k <= 0.
    bool well_separated_from_zero() const { return k0 / sigma >= 3.0; }
};

// Particle 1 in the superposition psi0(k) (1 + e^{ik ell}) / sqrt(2(1 + nu)).
struct SuperpositionSpec {
    GaussianWavepacket base;
    double ell = 0.0;  // path difference
    double delta() const { return base.sigma * ell; }
    double nu() const;
};

struct AsymmetryResult {
    double w = 0.0;
    double std_error = 0.0;  // zero for closed forms
    OrderDistribution distribution;
    std::vector<std::string> warnings;
};

// Both use the prefactor 1/sqrt(2 pi), so q1 runs from -1/2 to 1/2.
// q1(d) = N int dx exp(-2 (x - d)^2) erf(sqrt2 x)
// q2(d) = N int dx exp(-x^2 - (x - d)^2) erf(sqrt2 x)
double q1(double delta, const numerics::QuadratureSpec& spec = {1e-13, 1e-10, 2000});
double q2(double delta, const numerics::QuadratureSpec& spec = {1e-13, 1e-10, 2000});

// Builds p(M1) = 1/2 + w, p(M2) = 1/2 - w, p(M3) = 0.
AsymmetryResult make_asymmetry(double w);

// Two Gaussian packets with common (k0, sigma): w = q1(sigma (L2 - L1)).
// The nearer detector fires first more often, so w > 0 when L1 < L2.
AsymmetryResult asymmetry_simple(const GaussianWavepacket& pkt1, const GaussianWavepacket& pkt2);

// Particle 1 in a two-path superposition, particle 2 in the plain packet,
// equal distances. Throws NumericalError when the normalization 1 + nu vanishes.
AsymmetryResult asymmetry_superposition(const SuperpositionSpec& spec);

// Momentum amplitude on a uniform grid, normalized to int |psi|^2 dk = 1, plus
// the time window in which its arrival density lives.
struct MomentumAmplitude {
    std::vector<double> k;
    std::vector<std::complex<double>> psi;
    double L = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;

    double dk() const { return k.size() > 1 ? k[1] - k[0] : 0.0; }
    double norm() const;
    // Fraction of int |psi|^2 dk sitting at k <= 0.
    double nonpositive_fraction() const;
};

inline constexpr std::size_t kDefaultMomentumPoints = 4096;

// k in [k0 - 8 sigma, k0 + 8 sigma], psi0(k) = (2 pi s^2)^{-1/4} exp(-(k-k0)^2 / 4s^2) e^{i phase}.
MomentumAmplitude gaussian_amplitude(const GaussianWavepacket& pkt, std::size_t n = kDefaultMomentumPoints,
                                     double phase = 0.0);
MomentumAmplitude superposition_amplitude(const SuperpositionSpec& spec, std::size_t n = kDefaultMomentumPoints);

// p(t) = (1/2pi) |int dk psi(k) e^{-ikL + ikt}|^2 over the k > 0 part of the grid
// (massless, unit velocity, ideal localization). Trapezoid rule in k.
double toa_density(const MomentumAmplitude& amp, double t);

struct ToaCurve {
    std::vector<double> t;
    std::vector<double> p;
    std::vector<double> cdf;  // trapezoid running integral
    double mass = 0.0;        // cdf.back()
    std::vector<std::string> warnings;

    // Inverse CDF with linear interpolation; u in [0, 1).
    double sample(double u) const;
};

struct TimeGridOptions {
    // Window margins beyond the packet arrival, in units of 1/sigma.
    double margin = 10.0;
    // |psi(t)|^2 has spectrum inside the k-range width B; dt = pi / (oversample * B).
    double oversample = 4.0;
    // Captured probability must be within this of 1.
    double mass_tol = 1e-3;
};

// Tabulates toa_density over the amplitude's time window. Throws NumericalError
// if the CDF is not monotone or the window misses more than mass_tol.
ToaCurve toa_curve(const MomentumAmplitude& amp, const TimeGridOptions& opts = {});

// Samples t1 and t2 independently from the two curves and classifies the pairs.
AsymmetryResult asymmetry_mc(const ToaCurve& c1, const ToaCurve& c2, std::uint64_t n_samples, std::uint64_t seed);
AsymmetryResult asymmetry_mc(const MomentumAmplitude& a1, const MomentumAmplitude& a2, std::uint64_t n_samples,
                             std::uint64_t seed);

}  // namespace causal::toa
