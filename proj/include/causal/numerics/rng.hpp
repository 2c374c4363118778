#pragma once

#include <cstdint>
#include <random>

namespace causal::numerics {

// A reproducible random stream identified by (master seed, stream index).
// Distinct indices give independent engines; the same pair always replays the
// same sequence.
class SeedStream {
public:
    SeedStream(std::uint64_t seed, std::uint64_t index);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t index() const { return index_; }

    double normal();
    // Uniform on [0, 1).
    double uniform();

    std::mt19937_64& engine() { return engine_; }

private:
    std::uint64_t seed_;
    std::uint64_t index_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// Free-function form used by samplers that hold a stream by reference.
inline double rng_normal(SeedStream& stream) { return stream.normal(); }

}  // namespace causal::numerics
