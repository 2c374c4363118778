#include "causal/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "causal/errors.hpp"
#include "causal/numerics/ode.hpp"
#include "causal/numerics/quadrature.hpp"

namespace causal::detector {

namespace {

constexpr double kPi = std::numbers::pi;

void check_index(int x, const char* what) {
    require(x == 1 || x == 2, std::string(what) + " index must be 1 or 2");
}

// chi(q) normalized so that int dq/2pi |chi|^2 = 1.
double chi(double q, double sigma) {
    return std::sqrt(2.0 * kPi) * std::pow(2.0 * kPi * sigma * sigma, -0.25) * std::exp(-q * q / (4.0 * sigma * sigma));
}

// (e^{-iD t} - e^{-G t}) / (G - iD) written as e^{-iD t} t (1 - e^{-x}) / x with
// x = (G - iD) t, which stays accurate as G and D go to zero together.
cplx relaxed_phase(double G, double D, double t) {
    const cplx x(G * t, -D * t);
    cplx e;
    if (std::abs(x) < 1e-3) {
        e = 1.0 - x * (0.5 - x * (1.0 / 6.0 - x / 24.0));
    } else {
        e = (1.0 - std::exp(-x)) / x;
    }
    return std::polar(t, -D * t) * e;
}

}  // namespace

void ThreeLevelSpec::validate() const {
    require(std::isfinite(m) && m >= 0.0, "field mass must be non-negative");
    require(std::isfinite(omega1) && std::isfinite(omega2), "level energies must be finite");
    require(omega1 > m && omega2 > m, "level energies must exceed the field mass");
    require(std::isfinite(lambda1) && std::isfinite(lambda2), "couplings must be finite");
}

double ThreeLevelSpec::omega(int a) const {
    check_index(a, "level");
    return a == 1 ? omega1 : omega2;
}

double ThreeLevelSpec::lambda(int a) const {
    check_index(a, "level");
    return a == 1 ? lambda1 : lambda2;
}

void IncomingPair::validate() const {
    require(std::isfinite(sigma) && sigma > 0.0, "packet spread must be positive");
    require(std::isfinite(L) && L > 0.0, "start distance must be positive");
    require(std::isfinite(k1) && std::isfinite(k2) && k1 > 0.0 && k2 > 0.0, "packet momenta must be positive");
    require(std::abs(k1 - k2) >= 6.0 * sigma, "packets must be separated by at least 6 sigma in momentum");
}

double IncomingPair::k(int i) const {
    check_index(i, "packet");
    return i == 1 ? k1 : k2;
}

double IncomingPair::energy(int i, double m) const {
    const double q = k(i);
    return std::sqrt(q * q + m * m);
}

double eta(const ThreeLevelSpec& spec, int a) {
    spec.validate();
    const double om = spec.omega(a);
    const double lam = spec.lambda(a);
    return lam * lam * std::pow(om * om - spec.m * spec.m, 1.5) / (kPi * std::sqrt(om));
}

DecayRates decay_rates(const ThreeLevelSpec& spec, const IncomingPair& pair) {
    pair.validate();
    DecayRates r;
    const double e1 = pair.energy(1, spec.m), e2 = pair.energy(2, spec.m);
    for (int a = 1; a <= 2; ++a) {
        r.eta[a - 1] = eta(spec, a);
        r.gamma[0][a - 1] = 0.5 * r.eta[a - 1] / std::sqrt(e2);
        r.gamma[1][a - 1] = 0.5 * r.eta[a - 1] / std::sqrt(e1);
    }
    return r;
}

double arrival_time(const ThreeLevelSpec& spec, const IncomingPair& pair, int i) {
    return pair.L * pair.energy(i, spec.m) / pair.k(i);
}

double arrival_time_nonrelativistic(const ThreeLevelSpec& spec, const IncomingPair& pair, int i) {
    return spec.m * pair.L / pair.k(i);
}

ClosedForm::ClosedForm(const ThreeLevelSpec& spec, const IncomingPair& pair, double t_max)
    : spec_(spec), pair_(pair), rates_(decay_rates(spec, pair)), t_max_(t_max) {
    spec.validate();
    require(std::isfinite(t_max) && t_max >= 0.0, "time horizon must be non-negative");
    const double s = pair.sigma;
    for (int i = 1; i <= 2; ++i) {
        const double lo = pair.k(i) - 10.0 * s;
        const double hi = pair.k(i) + 10.0 * s;
        require(lo > 0.0, "packet reaches k <= 0; increase k_i / sigma");
        // Phase k L - eps_k t changes by at most (L + t_max) dk per step; keep that below 1/4.
        const auto n = std::max<std::size_t>(513, static_cast<std::size_t>(std::ceil((hi - lo) * (pair.L + t_max) / 0.25)) + 1);
        const double h = (hi - lo) / static_cast<double>(n - 1);
        auto& g = packets_[i - 1];
        g.eps.resize(n);
        g.weight.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double k = lo + h * static_cast<double>(j);
            const double eps = std::sqrt(k * k + spec.m * spec.m);
            const double trap = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
            g.eps[j] = eps;
            g.weight[j] = std::polar(trap * h / (2.0 * kPi) * chi(k - pair.k(i), s) / std::sqrt(2.0 * eps), k * pair.L);
        }
    }
}

cplx ClosedForm::f(int i, int a, double t) const {
    check_index(i, "packet");
    check_index(a, "level");
    require(t >= 0.0, "F_ia is defined for t >= 0");
    require(t <= t_max_ * (1.0 + 1e-12), "time beyond the horizon the momentum grid was built for");
    if (t == 0.0) return 0.0;
    const auto& g = packets_[i - 1];
    const double G = rates_(i, a);
    const double om = spec_.omega(a);
    const double decay = std::exp(-G * t);
    double sr = 0.0, si = 0.0;
    for (std::size_t j = 0; j < g.eps.size(); ++j) {
        const double D = g.eps[j] - om;
        double rr, ri;  // (e^{-G t} - e^{-iD t}) / (G - iD)
        if (std::hypot(G, D) * t < 1e-3) {
            const cplx r = -relaxed_phase(G, D, t);
            rr = r.real();
            ri = r.imag();
        } else {
            const double nr = decay - std::cos(D * t), ni = std::sin(D * t);
            const double q = G * G + D * D;
            rr = (nr * G - ni * D) / q;
            ri = (nr * D + ni * G) / q;
        }
        const double wr = g.weight[j].real(), wi = g.weight[j].imag();
        sr += wr * rr - wi * ri;
        si += wr * ri + wi * rr;
    }
    return {sr, si};
}

double ClosedForm::p_excited(int a, double t, Mode mode) const {
    const double lam = spec_.lambda(a);
    if (mode == Mode::resonant) return lam * lam * std::norm(f(a, a, t));
    return lam * lam * (std::norm(f(1, a, t)) + std::norm(f(2, a, t)));
}

cplx f_ia(double t, int i, int a, const ThreeLevelSpec& spec, const IncomingPair& pair) {
    return ClosedForm(spec, pair, t).f(i, a, t);
}

double p_excited(double t, int a, const ThreeLevelSpec& spec, const IncomingPair& pair, Mode mode) {
    return ClosedForm(spec, pair, t).p_excited(a, t, mode);
}

DecayFit fit_decay_rate(const ClosedForm& cf, int i, int a, std::size_t points) {
    require(points >= 3, "decay fit needs at least three points");
    DecayFit fit;
    fit.expected = cf.rates()(i, a);
    require(fit.expected > 0.0, "decay fit needs a non-zero coupling");
    const double ta = arrival_time(cf.spec(), cf.pair(), i);
    fit.t_lo = ta + 5.0 / fit.expected;
    fit.t_hi = ta + 15.0 / fit.expected;
    require(fit.t_hi <= cf.t_max(), "decay-fit window extends past the closed-form horizon");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t j = 0; j < points; ++j) {
        const double t = fit.t_lo + (fit.t_hi - fit.t_lo) * static_cast<double>(j) / static_cast<double>(points - 1);
        const double v = std::norm(cf.f(i, a, t));
        if (!(v > 0.0)) throw NumericalError("|F|^2 underflowed inside the decay-fit window");
        const double y = std::log(v);
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
    }
    const double n = static_cast<double>(points);
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.rate = -0.5 * slope;
    return fit;
}

PeakSuppression peak_suppression(const ClosedForm& cf, double dt) {
    require(dt > 0.0, "scan step must be positive");
    const auto& spec = cf.spec();
    const auto& pair = cf.pair();
    const double e1 = pair.energy(1, spec.m);
    const double v = pair.k1 / e1;
    const double ta = arrival_time(spec, pair, 1);
    const double g11 = cf.rates()(1, 1), g12 = cf.rates()(1, 2);
    const double g_min = std::min(g11, g12);
    require(g_min > 0.0, "peak scan needs both couplings non-zero");
    const double lo = std::max(0.0, ta - 6.0 / (pair.sigma * v));
    const double hi = std::min(cf.t_max(), ta + 6.0 / (pair.sigma * v) + 5.0 / g_min);
    double m11 = 0.0, m12 = 0.0;
    for (double t = lo; t <= hi; t += dt) {
        m11 = std::max(m11, std::norm(cf.f(1, 1, t)));
        m12 = std::max(m12, std::norm(cf.f(1, 2, t)));
    }
    require(m11 > 0.0, "resonant amplitude vanished over the scan");
    PeakSuppression r;
    r.measured = m12 / m11;
    const double d1 = e1 - spec.omega1, d2 = e1 - spec.omega2;
    r.predicted = (g11 * g11 + d1 * d1) / (g12 * g12 + d2 * d2);
    return r;
}

namespace {

Branching normalize_branching(Branching b, const DecayRates& rates, double t_last_arrival) {
    const double total = b.fired[0] + b.fired[1];
    if (!(total > 0.0)) throw ParameterError("neither transition can fire (both couplings zero?)");
    b.distribution.set(two_event::m1(), b.fired[0] / total);
    b.distribution.set(two_event::m2(), b.fired[1] / total);
    double g_min = 0.0;
    for (int a = 1; a <= 2; ++a) {
        const double g = rates(a, a);
        if (g > 0.0) g_min = g_min > 0.0 ? std::min(g_min, g) : g;
    }
    if (b.horizon < t_last_arrival + 10.0 / g_min)
        b.warnings.push_back("horizon shorter than the last arrival + 10/Gamma; branching uses partial mass");
    if (total > 1.0 + 1e-6) b.warnings.push_back("fired weights exceed 1: " + std::to_string(total));
    return b;
}

}  // namespace

Branching branching_probabilities(const ThreeLevelSpec& spec, const IncomingPair& pair, double horizon, Mode mode) {
    require(std::isfinite(horizon) && horizon > 0.0, "branching horizon must be positive");
    ClosedForm cf(spec, pair, horizon);
    // Split the time axis around both arrivals so the adaptive rule sees the pulses.
    std::vector<double> cuts{0.0, horizon};
    for (int i = 1; i <= 2; ++i) {
        const double ta = arrival_time(spec, pair, i);
        const double w = 6.0 * pair.energy(i, spec.m) / (pair.k(i) * pair.sigma);
        for (double c : {ta - w, ta, ta + w})
            if (c > 0.0 && c < horizon) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    Branching b;
    b.horizon = horizon;
    numerics::QuadratureSpec qs{1e-14, 1e-8, 4000};
    for (int a = 1; a <= 2; ++a) {
        if (spec.lambda(a) == 0.0) continue;
        double integral = 0.0;
        for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
            auto r = numerics::integrate([&](double t) { return cf.p_excited(a, t, mode); }, cuts[s], cuts[s + 1], qs);
            if (!r.converged) throw NumericalError("time integral of p_a did not converge");
            integral += r.value;
        }
        b.fired[a - 1] = 2.0 * cf.rates()(a, a) * integral;
        b.residual += cf.p_excited(a, horizon, mode);
    }
    const double last = std::max(arrival_time(spec, pair, 1), arrival_time(spec, pair, 2));
    return normalize_branching(std::move(b), cf.rates(), last);
}

namespace {

// Everything the right-hand side needs, laid out as split real/imag arrays so
// the N^2 loops vectorize.
struct GridModel {
    std::size_t n = 0;
    double mu = 0.0;
    std::array<double, 2> lambda{};
    std::array<double, 2> omega{};
    std::vector<double> eps, inv_sqrt2eps;
    std::array<std::vector<double>, 2> gamma;  // Gamma_a(k)
    // scratch
    std::array<std::vector<double>, 2> g_re, g_im, u_re, u_im;

    std::size_t size() const { return n * n + 2 * n + 2; }

    void rhs(double t, const std::vector<cplx>& y, std::vector<cplx>& dy) {
        const double* c = reinterpret_cast<const double*>(y.data());
        double* dc = reinterpret_cast<double*>(dy.data());
        const cplx* d[2] = {y.data() + n * n, y.data() + n * n + n};
        cplx* dd[2] = {dy.data() + n * n, dy.data() + n * n + n};

        for (int a = 0; a < 2; ++a) {
            for (std::size_t j = 0; j < n; ++j) {
                const double ph = -(eps[j] - omega[a]) * t;
                g_re[a][j] = std::cos(ph) * inv_sqrt2eps[j];
                g_im[a][j] = std::sin(ph) * inv_sqrt2eps[j];
                u_re[a][j] = lambda[a] * d[a][j].real();
                u_im[a][j] = lambda[a] * d[a][j].imag();
            }
        }
        const double *g1r = g_re[0].data(), *g1i = g_im[0].data(), *g2r = g_re[1].data(), *g2i = g_im[1].data();
        const double *u1r = u_re[0].data(), *u1i = u_im[0].data(), *u2r = u_re[1].data(), *u2i = u_im[1].data();

        for (std::size_t k = 0; k < n; ++k) {
            const double* row = c + 2 * n * k;
            double* drow = dc + 2 * n * k;
            // v_a = conj(g_a); the k-side factors of the outer products.
            const double A1r = u1r[k], A1i = u1i[k], B1r = g1r[k], B1i = -g1i[k];
            const double A2r = u2r[k], A2i = u2i[k], B2r = g2r[k], B2i = -g2i[k];
            double s1r = 0, s1i = 0, s2r = 0, s2i = 0;
            for (std::size_t q = 0; q < n; ++q) {
                const double cr = row[2 * q], ci = row[2 * q + 1];
                s1r += cr * g1r[q] - ci * g1i[q];
                s1i += cr * g1i[q] + ci * g1r[q];
                s2r += cr * g2r[q] - ci * g2i[q];
                s2i += cr * g2i[q] + ci * g2r[q];
                // S = u_a(k) conj(g_a(q)) + u_a(q) conj(g_a(k)), summed over a.
                const double sr = (A1r * g1r[q] + A1i * g1i[q]) + (u1r[q] * B1r - u1i[q] * B1i) +
                                  (A2r * g2r[q] + A2i * g2i[q]) + (u2r[q] * B2r - u2i[q] * B2i);
                const double si = (A1i * g1r[q] - A1r * g1i[q]) + (u1r[q] * B1i + u1i[q] * B1r) +
                                  (A2i * g2r[q] - A2r * g2i[q]) + (u2r[q] * B2i + u2i[q] * B2r);
                // dc = -i S
                drow[2 * q] = si;
                drow[2 * q + 1] = -sr;
            }
            const double s_re[2] = {s1r, s2r}, s_im[2] = {s1i, s2i};
            for (int a = 0; a < 2; ++a) {
                const double f = 2.0 * lambda[a] * mu;
                // -2i lambda mu s - Gamma d
                dd[a][k] = cplx(f * s_im[a], -f * s_re[a]) - gamma[a][k] * d[a][k];
            }
        }
        for (int a = 0; a < 2; ++a) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += gamma[a][j] * std::norm(d[a][j]);
            dy[n * n + 2 * n + a] = 2.0 * mu * acc;
        }
    }

    GridSnapshot snapshot(double t, const std::vector<cplx>& y) const {
        GridSnapshot s;
        s.t = t;
        double cn = 0.0;
        for (std::size_t j = 0; j < n * n; ++j) cn += std::norm(y[j]);
        s.norm = mu * mu * cn;
        for (int a = 0; a < 2; ++a) {
            const cplx* d = y.data() + n * n + a * n;
            s.d[a].assign(d, d + n);
            double dn = 0.0;
            for (std::size_t j = 0; j < n; ++j) dn += std::norm(d[j]);
            s.p[a] = mu * dn;
            s.emitted[a] = y[n * n + 2 * n + a].real();
            s.norm += s.p[a] + s.emitted[a];
        }
        return s;
    }
};

}  // namespace

GridTrajectory grid_evolve(const ThreeLevelSpec& spec, const IncomingPair& pair, const GridConfig& cfg,
                           double t_final) {
    spec.validate();
    pair.validate();
    require(cfg.n >= 16, "momentum grid needs at least 16 points");
    require(cfg.margin > 0.0 && cfg.record_every > 0.0 && cfg.drift_tol > 0.0, "bad grid configuration");
    require(std::isfinite(t_final) && t_final > 0.0, "evolution time must be positive");
    const double s = pair.sigma;
    const double lo = std::min(pair.k1, pair.k2) - cfg.margin * s;
    const double hi = std::max(pair.k1, pair.k2) + cfg.margin * s;
    require(lo > 0.0, "momentum grid reaches k <= 0");
    const std::size_t n = cfg.n;
    const double h = (hi - lo) / static_cast<double>(n - 1);
    // The grid is periodic in position with period 2pi/h; a packet that has
    // passed the detector must not wrap back onto it before t_final.
    require(2.0 * kPi / h > t_final - pair.L + cfg.margin / s, "momentum grid too coarse for this evolution time");

    const auto rates = decay_rates(spec, pair);
    GridModel model;
    model.n = n;
    model.mu = h / (2.0 * kPi);
    GridTrajectory traj;
    traj.k.resize(n);
    traj.mu = model.mu;
    model.eps.resize(n);
    model.inv_sqrt2eps.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        traj.k[j] = lo + h * static_cast<double>(j);
        model.eps[j] = std::sqrt(traj.k[j] * traj.k[j] + spec.m * spec.m);
        model.inv_sqrt2eps[j] = 1.0 / std::sqrt(2.0 * model.eps[j]);
    }
    double omega_max = 0.0, gamma_max = 0.0;
    for (int a = 0; a < 2; ++a) {
        model.lambda[a] = spec.lambda(a + 1);
        model.omega[a] = spec.omega(a + 1);
        model.gamma[a].resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            model.gamma[a][j] = 0.5 * rates.eta[a] / std::sqrt(model.eps[j]);
            gamma_max = std::max(gamma_max, model.gamma[a][j]);
            omega_max = std::max(omega_max, std::abs(model.eps[j] - model.omega[a]));
        }
        model.g_re[a].resize(n);
        model.g_im[a].resize(n);
        model.u_re[a].resize(n);
        model.u_im[a].resize(n);
    }

    double dt = cfg.dt;
    if (dt <= 0.0) {
        dt = 0.25 / omega_max;
        if (gamma_max > 0.0) dt = std::min(dt, 0.1 / gamma_max);
    }
    const auto steps = static_cast<std::size_t>(std::ceil(t_final / dt));
    dt = t_final / static_cast<double>(steps);
    traj.dt = dt;
    const auto stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.record_every / dt)));

    std::vector<cplx> y(model.size(), 0.0);
    std::vector<cplx> psi1(n), psi2(n);
    for (std::size_t j = 0; j < n; ++j) {
        psi1[j] = std::polar(chi(traj.k[j] - pair.k1, s), traj.k[j] * pair.L);
        psi2[j] = std::polar(chi(traj.k[j] - pair.k2, s), traj.k[j] * pair.L);
    }
    const double r2 = 1.0 / std::sqrt(2.0);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) y[a * n + b] = r2 * (psi1[a] * psi2[b] + psi1[b] * psi2[a]);
    traj.c_initial.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n * n));

    auto record = [&](double t) {
        traj.snapshots.push_back(model.snapshot(t, y));
        const double drift = std::abs(traj.snapshots.back().norm - traj.snapshots.front().norm);
        traj.max_drift = std::max(traj.max_drift, drift);
        if (!(drift <= cfg.drift_tol))
            throw NumericalError("grid evolution norm drifted by " + std::to_string(drift) + "; reduce dt");
    };
    record(0.0);
    numerics::Rk4Stepper<cplx> stepper(model.size());
    auto rhs = [&](double t, const std::vector<cplx>& yy, std::vector<cplx>& dy) { model.rhs(t, yy, dy); };
    for (std::size_t step = 1; step <= steps; ++step) {
        stepper.step(rhs, dt * static_cast<double>(step - 1), dt, y);
        if (step % stride == 0 || step == steps) record(dt * static_cast<double>(step));
    }
    traj.c_final.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n * n));
    return traj;
}

std::vector<cplx> wigner_weisskopf_d(const ThreeLevelSpec& spec, const IncomingPair& pair, const GridTrajectory& traj,
                                     int a, double t) {
    check_index(a, "level");
    require(t >= 0.0, "time must be non-negative");
    const std::size_t n = traj.k.size();
    require(traj.c_initial.size() == n * n, "trajectory carries no initial state");
    const auto rates = decay_rates(spec, pair);
    const double om = spec.omega(a);
    const double lam = spec.lambda(a);
    std::vector<double> eps(n), gam(n);
    for (std::size_t j = 0; j < n; ++j) {
        eps[j] = std::sqrt(traj.k[j] * traj.k[j] + spec.m * spec.m);
        gam[j] = 0.5 * rates.eta[a - 1] / std::sqrt(eps[j]);
    }
    std::vector<cplx> d(n);
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc = 0.0;
        for (std::size_t q = 0; q < n; ++q)
            acc += traj.c_initial[k * n + q] * relaxed_phase(gam[k], eps[q] - om, t) / std::sqrt(2.0 * eps[q]);
        d[k] = cplx(0.0, -2.0 * lam * traj.mu) * acc;
    }
    return d;
}

Branching branching_from_grid(const ThreeLevelSpec& spec, const IncomingPair& pair, const GridTrajectory& traj) {
    require(traj.snapshots.size() >= 2, "trajectory too short");
    const auto rates = decay_rates(spec, pair);
    Branching b;
    b.horizon = traj.snapshots.back().t;
    for (int a = 0; a < 2; ++a) {
        double integral = 0.0;
        for (std::size_t j = 1; j < traj.snapshots.size(); ++j) {
            const auto& s0 = traj.snapshots[j - 1];
            const auto& s1 = traj.snapshots[j];
            integral += 0.5 * (s1.t - s0.t) * (s0.p[a] + s1.p[a]);
        }
        b.fired[a] = 2.0 * rates(a + 1, a + 1) * integral;
        b.residual += traj.snapshots.back().p[a];
    }
    const double last = std::max(arrival_time(spec, pair, 1), arrival_time(spec, pair, 2));
    return normalize_branching(std::move(b), rates, last);
}

}  // namespace causal::detector
