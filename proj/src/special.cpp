#include "causal/numerics/special.hpp"

#include "causal/errors.hpp"

namespace causal::numerics {

double normal_quantile(double p) {
    require(p > 0.0 && p < 1.0, "normal_quantile needs p in (0, 1)");
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++i) {
        const double mid = 0.5 * (lo + hi);
        (normal_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace causal::numerics
