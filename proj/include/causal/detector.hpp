#pragma once

// A three-level system at x = 0 absorbing one of two incoming scalar-field
// particles. Particle 1 drives 0 -> 1, particle 2 drives 0 -> 2, so the excited
// level records which particle was detected first.
//
// Two routes are provided: Wigner-Weisskopf closed forms F_ia(t) evaluated by
// quadrature over momentum, and a brute-force RK4 evolution of the amplitude
// equations on a 1D momentum grid.

#include <array>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "causal/order.hpp"

namespace causal::detector {

using cplx = std::complex<double>;

// Levels and packets are indexed 1 and 2 throughout.
struct ThreeLevelSpec {
    double omega1 = 10.0;
    double omega2 = 14.0;
    double lambda1 = 0.1;
    double lambda2 = 0.1;
    double m = 0.0;  // field mass

    void validate() const;
    double omega(int a) const;
    double lambda(int a) const;
};

struct IncomingPair {
    double k1 = 10.0;
    double k2 = 14.0;
    double sigma = 0.4;  // momentum spread of both packets
    double L = 10.0;     // both start around x = -L

    void validate() const;
    double k(int i) const;
    double energy(int i, double m) const;
};

// eta_a = lambda_a^2 (Omega_a^2 - m^2)^{3/2} / (pi sqrt(Omega_a)), taken positive.
double eta(const ThreeLevelSpec& spec, int a);

struct DecayRates {
    std::array<double, 2> eta{};
    // gamma[i-1][a-1] = Gamma_ia. The excited state decays at eta_a/2 eps^{-1/2}
    // with eps the energy of the particle left over, so
    // Gamma_1a = eta_a/2 eps_2^{-1/2} and Gamma_2a = eta_a/2 eps_1^{-1/2}.
    std::array<std::array<double, 2>, 2> gamma{};

    double operator()(int i, int a) const { return gamma[i - 1][a - 1]; }
};

DecayRates decay_rates(const ThreeLevelSpec& spec, const IncomingPair& pair);

// Group-velocity arrival time L eps_i / k_i.
double arrival_time(const ThreeLevelSpec& spec, const IncomingPair& pair, int i);
// m L / k_i, the non-relativistic expression (zero for a massless field).
double arrival_time_nonrelativistic(const ThreeLevelSpec& spec, const IncomingPair& pair, int i);

enum class Mode { full, resonant };

// F_ia(t) = int dk/2pi psi_i(k) [e^{-G t} - e^{-i(eps_k - Omega_a) t}] / (sqrt(2 eps_k) [G - i(eps_k - Omega_a)])
// with G = Gamma_ia and psi_i(k) = chi(k - k_i) e^{ikL}, chi a Gaussian normalized
// in dk/2pi. Trapezoid rule on k_i +- 10 sigma with spacing fine enough for
// the phases up to t_max.
class ClosedForm {
public:
    ClosedForm(const ThreeLevelSpec& spec, const IncomingPair& pair, double t_max);

    cplx f(int i, int a, double t) const;
    double p_excited(int a, double t, Mode mode = Mode::full) const;

    const ThreeLevelSpec& spec() const { return spec_; }
    const IncomingPair& pair() const { return pair_; }
    const DecayRates& rates() const { return rates_; }
    double t_max() const { return t_max_; }
    std::size_t grid_points(int i) const { return packets_[i - 1].weight.size(); }

private:
    struct PacketGrid {
        std::vector<double> eps;
        std::vector<cplx> weight;  // dk/2pi psi_i(k) / sqrt(2 eps_k), trapezoid weights folded in
    };
    ThreeLevelSpec spec_;
    IncomingPair pair_;
    DecayRates rates_;
    double t_max_;
    std::array<PacketGrid, 2> packets_;
};

// One-shot forms; each builds a ClosedForm for horizon t.
cplx f_ia(double t, int i, int a, const ThreeLevelSpec& spec, const IncomingPair& pair);
double p_excited(double t, int a, const ThreeLevelSpec& spec, const IncomingPair& pair, Mode mode = Mode::full);

struct DecayFit {
    double rate = 0.0;      // -slope / 2 of log |F|^2
    double expected = 0.0;  // Gamma_ia
    double t_lo = 0.0;
    double t_hi = 0.0;
};

// Least-squares slope of log |F_ia|^2 on [t_a + 5/G, t_a + 15/G]; requires
// cf.t_max() to cover the window.
DecayFit fit_decay_rate(const ClosedForm& cf, int i, int a, std::size_t points = 101);

struct PeakSuppression {
    double measured = 0.0;   // max_t |F_12|^2 / max_t |F_11|^2
    double predicted = 0.0;  // [G11^2 + (eps1 - Omega1)^2] / [G12^2 + (eps1 - Omega2)^2]
};

// Scans t over the arrival of packet 1 with step dt.
PeakSuppression peak_suppression(const ClosedForm& cf, double dt);

struct Branching {
    OrderDistribution distribution;  // M1 <-> level 1 fired, M2 <-> level 2 fired
    std::array<double, 2> fired{};   // 2 Gamma_aa int_0^T p_a dt before normalization
    double horizon = 0.0;
    double residual = 0.0;  // p_1(T) + p_2(T)
    std::vector<std::string> warnings;
};

// p(M_a) proportional to 2 Gamma_aa int_0^T p_a(t) dt, normalized over a.
Branching branching_probabilities(const ThreeLevelSpec& spec, const IncomingPair& pair, double horizon,
                                  Mode mode = Mode::full);

struct GridConfig {
    std::size_t n = 512;
    double margin = 8.0;          // grid spans both packets +- margin sigma
    double dt = 0.0;              // 0: 0.25 / max |eps_k - Omega_a|, capped by 0.1 / max Gamma
    double record_every = 0.25;   // snapshot spacing in time
    double drift_tol = 1e-4;      // norm drift that aborts the run
};

struct GridSnapshot {
    double t = 0.0;
    double norm = 0.0;                 // mu^2 sum|c|^2 + mu sum|d|^2 + emitted
    std::array<double, 2> p{};         // mu sum_k |d_a(k)|^2
    std::array<double, 2> emitted{};   // probability lost through the decay sink
    std::array<std::vector<cplx>, 2> d;
};

struct GridTrajectory {
    std::vector<double> k;
    double mu = 0.0;  // dk / 2pi
    double dt = 0.0;
    std::vector<GridSnapshot> snapshots;
    std::vector<cplx> c_initial;  // row-major n x n
    std::vector<cplx> c_final;
    double max_drift = 0.0;
};

// Interaction-picture amplitude equations on a uniform grid (mu = dk/2pi):
//   dc(k,k')/dt = -i sum_a lambda_a [d_a(k) g_a*(k') + d_a(k') g_a*(k)]
//   dd_a(k)/dt  = -2i lambda_a mu sum_k' c(k,k') g_a(k') - Gamma_a(k) d_a(k)
// with g_a(k) = e^{-i(eps_k - Omega_a) t} / sqrt(2 eps_k). Gamma_a(k) =
// eta_a/2 eps_k^{-1/2} stands for emission out of the 1D window; what it
// removes is tracked so the total norm stays checkable. Fixed-step RK4.
// Throws NumericalError when the norm drifts by more than drift_tol.
GridTrajectory grid_evolve(const ThreeLevelSpec& spec, const IncomingPair& pair, const GridConfig& cfg,
                           double t_final);

// The same d_a(k, t) without back-reaction on c:
// d_a(k) = -2i lambda_a mu sum_k' c0(k,k') int_0^t e^{-Gamma_a(k)(t-s)} g_a(k', s) ds.
std::vector<cplx> wigner_weisskopf_d(const ThreeLevelSpec& spec, const IncomingPair& pair,
                                     const GridTrajectory& traj, int a, double t);

// Branching functional evaluated on the grid trajectory (trapezoid in time).
Branching branching_from_grid(const ThreeLevelSpec& spec, const IncomingPair& pair, const GridTrajectory& traj);

}  // namespace causal::detector
