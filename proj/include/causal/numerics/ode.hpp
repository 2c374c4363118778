#pragma once

#include <cstddef>
#include <vector>

namespace causal::numerics {

// Classical fixed-step RK4 for flat real/complex state vectors.
//
// `rhs(t, y, dydt)` writes the derivative into `dydt` (already sized). The
// stepper owns its stage buffers so repeated steps do not allocate.
template <class Scalar>
class Rk4Stepper {
public:
    explicit Rk4Stepper(std::size_t n) : k1_(n), k2_(n), k3_(n), k4_(n), tmp_(n) {}

    template <class Rhs>
    void step(Rhs&& rhs, double t, double dt, std::vector<Scalar>& y) {
        const std::size_t n = y.size();
        rhs(t, y, k1_);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + (0.5 * dt) * k1_[i];
        rhs(t + 0.5 * dt, tmp_, k2_);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + (0.5 * dt) * k2_[i];
        rhs(t + 0.5 * dt, tmp_, k3_);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + dt * k3_[i];
        rhs(t + dt, tmp_, k4_);
        const double w = dt / 6.0;
        for (std::size_t i = 0; i < n; ++i) y[i] += w * (k1_[i] + 2.0 * (k2_[i] + k3_[i]) + k4_[i]);
    }

private:
    std::vector<Scalar> k1_, k2_, k3_, k4_, tmp_;
};

}  // namespace causal::numerics
