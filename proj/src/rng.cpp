#include "causal/numerics/rng.hpp"

namespace causal::numerics {

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      0x9e3779b9u};
    return std::mt19937_64(seq);
}

}  // namespace

SeedStream::SeedStream(std::uint64_t seed, std::uint64_t index)
    : seed_(seed), index_(index), engine_(make_engine(seed, index)) {}

double SeedStream::normal() { return normal_(engine_); }

double SeedStream::uniform() { return uniform_(engine_); }

}  // namespace causal::numerics
