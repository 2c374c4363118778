#include "causal/quantum_toa.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "causal/errors.hpp"
#include "causal/numerics/chunked.hpp"
#include "causal/numerics/rng.hpp"

namespace causal::toa {

namespace {

constexpr double kPi = std::numbers::pi;
const double kNorm = 1.0 / std::sqrt(2.0 * kPi);

double q_integral(const numerics::Integrand& f, double center, const numerics::QuadratureSpec& spec) {
    auto r = numerics::integrate_real_line(f, center, 0.5, spec);
    if (!r.converged) throw NumericalError("Q-function quadrature did not converge");
    return kNorm * r.value;
}

std::string nonpositive_warning(double fraction) {
    return "amplitude has " + std::to_string(fraction) + " of its weight at k <= 0; that part never arrives";
}

}  // namespace

void GaussianWavepacket::validate() const {
    require(std::isfinite(k0) && k0 > 0.0, "wavepacket mean momentum must be positive");
    require(std::isfinite(sigma) && sigma > 0.0, "wavepacket spread must be positive");
    require(std::isfinite(L) && L > 0.0, "detector distance must be positive");
}

double SuperpositionSpec::nu() const {
    return std::exp(-0.5 * base.sigma * base.sigma * ell * ell) * std::cos(base.k0 * ell);
}

double q1(double delta, const numerics::QuadratureSpec& spec) {
    require(std::isfinite(delta), "q1 needs a finite argument");
    if (delta == 0.0) return 0.0;
    // Odd in delta (x -> -x); evaluating at |delta| makes that exact.
    const double d = std::abs(delta);
    const double s2 = std::sqrt(2.0);
    return std::copysign(
        q_integral([=](double x) { return std::exp(-2.0 * (x - d) * (x - d)) * std::erf(s2 * x); }, d, spec), delta);
}

double q2(double delta, const numerics::QuadratureSpec& spec) {
    require(std::isfinite(delta), "q2 needs a finite argument");
    if (delta == 0.0) return 0.0;
    const double d = std::abs(delta);
    const double s2 = std::sqrt(2.0);
    // The Gaussian factor peaks at x = delta / 2.
    return std::copysign(
        q_integral([=](double x) { return std::exp(-x * x - (x - d) * (x - d)) * std::erf(s2 * x); }, 0.5 * d, spec),
        delta);
}

AsymmetryResult make_asymmetry(double w) {
    require(std::isfinite(w) && std::abs(w) <= 0.5 + 1e-12, "asymmetry must lie in [-1/2, 1/2]");
    w = std::clamp(w, -0.5, 0.5);
    AsymmetryResult r;
    r.w = w;
    r.distribution.set(two_event::m1(), 0.5 + w);
    r.distribution.set(two_event::m2(), 0.5 - w);
    r.distribution.set(two_event::m3(), 0.0);
    return r;
}

AsymmetryResult asymmetry_simple(const GaussianWavepacket& pkt1, const GaussianWavepacket& pkt2) {
    pkt1.validate();
    pkt2.validate();
    require(pkt1.k0 == pkt2.k0 && pkt1.sigma == pkt2.sigma, "both packets must share k0 and sigma");
    auto r = make_asymmetry(q1(pkt1.sigma * (pkt2.L - pkt1.L)));
    if (!pkt1.well_separated_from_zero()) r.warnings.push_back("k0/sigma < 3: packet reaches k <= 0");
    return r;
}

AsymmetryResult asymmetry_superposition(const SuperpositionSpec& spec) {
    spec.base.validate();
    require(std::isfinite(spec.ell), "path difference must be finite");
    const double d = spec.delta();
    const double c = std::cos(spec.base.k0 / spec.base.sigma * d);
    const double denom = 2.0 * (1.0 + std::exp(-0.5 * d * d) * c);
    if (std::abs(denom) < 1e-12) throw NumericalError("superposition state is degenerate (1 + nu = 0)");
    auto r = make_asymmetry((q1(d) + 2.0 * q2(d) * c) / denom);
    if (!spec.base.well_separated_from_zero()) r.warnings.push_back("k0/sigma < 3: packet reaches k <= 0");
    return r;
}

double MomentumAmplitude::norm() const {
    std::vector<double> y(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) y[i] = std::norm(psi[i]);
    return numerics::trapezoid(y.data(), y.size(), dk());
}

double MomentumAmplitude::nonpositive_fraction() const {
    std::vector<double> y(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) y[i] = k[i] <= 0.0 ? std::norm(psi[i]) : 0.0;
    const double total = norm();
    return total > 0.0 ? numerics::trapezoid(y.data(), y.size(), dk()) / total : 0.0;
}

namespace {

MomentumAmplitude gaussian_grid(const GaussianWavepacket& pkt, std::size_t n) {
    pkt.validate();
    require(n >= 16, "momentum grid needs at least 16 points");
    MomentumAmplitude a;
    a.L = pkt.L;
    a.k.resize(n);
    a.psi.resize(n);
    const double lo = pkt.k0 - 8.0 * pkt.sigma;
    const double h = 16.0 * pkt.sigma / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) a.k[i] = lo + h * static_cast<double>(i);
    return a;
}

double gaussian_profile(const GaussianWavepacket& pkt, double k) {
    const double s = pkt.sigma;
    const double q = k - pkt.k0;
    return std::pow(2.0 * kPi * s * s, -0.25) * std::exp(-q * q / (4.0 * s * s));
}

}  // namespace

MomentumAmplitude gaussian_amplitude(const GaussianWavepacket& pkt, std::size_t n, double phase) {
    auto a = gaussian_grid(pkt, n);
    const auto g = std::polar(1.0, phase);
    for (std::size_t i = 0; i < n; ++i) a.psi[i] = g * gaussian_profile(pkt, a.k[i]);
    a.t_lo = pkt.L;
    a.t_hi = pkt.L;
    return a;
}

MomentumAmplitude superposition_amplitude(const SuperpositionSpec& spec, std::size_t n) {
    const double nu = spec.nu();
    if (1.0 + nu < 1e-12) throw NumericalError("superposition state is degenerate (1 + nu = 0)");
    auto a = gaussian_grid(spec.base, n);
    const double scale = 1.0 / std::sqrt(2.0 * (1.0 + nu));
    for (std::size_t i = 0; i < n; ++i)
        a.psi[i] = scale * gaussian_profile(spec.base, a.k[i]) * (1.0 + std::polar(1.0, a.k[i] * spec.ell));
    // The e^{ik ell} branch arrives at L - ell.
    a.t_lo = spec.base.L - std::max(spec.ell, 0.0);
    a.t_hi = spec.base.L + std::max(-spec.ell, 0.0);
    return a;
}

double toa_density(const MomentumAmplitude& amp, double t) {
    require(amp.k.size() == amp.psi.size() && amp.k.size() >= 2, "malformed momentum amplitude");
    const double tau = t - amp.L;
    const std::size_t n = amp.k.size();
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (amp.k[i] <= 0.0) continue;
        const double wgt = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
        const double ph = amp.k[i] * tau;
        const double c = std::cos(ph), s = std::sin(ph);
        re += wgt * (amp.psi[i].real() * c - amp.psi[i].imag() * s);
        im += wgt * (amp.psi[i].real() * s + amp.psi[i].imag() * c);
    }
    const double h = amp.dk();
    return (re * re + im * im) * h * h / (2.0 * kPi);
}

double ToaCurve::sample(double u) const {
    const double target = u * mass;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    if (it == cdf.begin()) return t.front();
    if (it == cdf.end()) return t.back();
    const std::size_t j = static_cast<std::size_t>(it - cdf.begin());
    const double span = cdf[j] - cdf[j - 1];
    const double frac = span > 0.0 ? (target - cdf[j - 1]) / span : 0.0;
    return t[j - 1] + frac * (t[j] - t[j - 1]);
}

ToaCurve toa_curve(const MomentumAmplitude& amp, const TimeGridOptions& opts) {
    require(amp.k.size() >= 2, "malformed momentum amplitude");
    require(opts.margin > 0.0 && opts.oversample >= 1.0, "bad time-grid options");
    const double band = amp.k.back() - amp.k.front();
    // The grid spans 16 sigma, so 1/sigma = 16 / band.
    const double inv_sigma = 16.0 / band;
    const double lo = amp.t_lo - opts.margin * inv_sigma;
    const double hi = amp.t_hi + opts.margin * inv_sigma;
    const double dt_max = kPi / (opts.oversample * band);
    const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / dt_max)) + 1;
    const double dt = (hi - lo) / static_cast<double>(n - 1);

    ToaCurve c;
    c.t.resize(n);
    c.p.resize(n);
    c.cdf.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        c.t[i] = lo + dt * static_cast<double>(i);
        c.p[i] = toa_density(amp, c.t[i]);
    }
    for (std::size_t i = 1; i < n; ++i) {
        c.cdf[i] = c.cdf[i - 1] + 0.5 * dt * (c.p[i - 1] + c.p[i]);
        if (!(c.cdf[i] >= c.cdf[i - 1])) throw NumericalError("arrival-time CDF is not monotone; refine the grid");
    }
    c.mass = c.cdf.back();

    const double neg = amp.nonpositive_fraction();
    if (neg > 1e-6) c.warnings.push_back(nonpositive_warning(neg));
    const double expected = amp.norm() * (1.0 - neg);
    if (std::abs(c.mass - expected) > opts.mass_tol)
        throw NumericalError("time window captures " + std::to_string(c.mass) + " of the arrival probability");
    return c;
}

AsymmetryResult asymmetry_mc(const ToaCurve& c1, const ToaCurve& c2, std::uint64_t n_samples, std::uint64_t seed) {
    require(n_samples >= 1, "need at least one sample");
    require(c1.mass > 0.0 && c2.mass > 0.0, "arrival curves carry no probability");
    for (const ToaCurve* c : {&c1, &c2}) {
        double early = 0.0;
        for (std::size_t i = 1; i < c->t.size() && c->t[i - 1] < 0.0; ++i) early = c->cdf[i];
        require(early <= 1e-6 * c->mass, "packet already overlaps the detector at t = 0 (" + std::to_string(early / c->mass) +
                                             " of the arrival probability lies before it); increase L or sigma");
    }
    auto body = [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        // Streams 2j and 2j+1 feed the two particles of chunk j.
        numerics::SeedStream s1(seed, 2 * chunk), s2(seed, 2 * chunk + 1);
        OrderCounter counter;
        OutcomeVector v(2);
        for (std::size_t i = begin; i < end; ++i) {
            // Negligible tails before t = 0 are clamped onto it.
            v[0] = Outcome::at(std::max(c1.sample(s1.uniform()), 0.0));
            v[1] = Outcome::at(std::max(c2.sample(s2.uniform()), 0.0));
            counter.add(v);
        }
        return counter;
    };
    auto counts = numerics::run_chunked<OrderCounter>(n_samples, numerics::kDefaultChunk, body,
                                                      [](OrderCounter& acc, const OrderCounter& p) { acc.merge(p); });
    AsymmetryResult r;
    r.distribution = counts.distribution();
    r.distribution.set(two_event::m3(), 0.0);
    r.w = r.distribution.probability(two_event::m1()) - 0.5;
    r.std_error = r.distribution.std_error(two_event::m1()).value_or(0.0);
    r.warnings = c1.warnings;
    r.warnings.insert(r.warnings.end(), c2.warnings.begin(), c2.warnings.end());
    return r;
}

AsymmetryResult asymmetry_mc(const MomentumAmplitude& a1, const MomentumAmplitude& a2, std::uint64_t n_samples,
                             std::uint64_t seed) {
    return asymmetry_mc(toa_curve(a1), toa_curve(a2), n_samples, seed);
}

}  // namespace causal::toa
