#pragma once

#include <cstdint>
#include <random>

namespace tsc {

// Deterministic random stream. All randomness in the project goes through
// this wrapper so that trajectories are bit-reproducible for a given seed:
// the raw mt19937_64 output is mapped to doubles directly instead of going
// through implementation-defined std distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    // Uniform index in [0, n). Modulo bias is below 2^-53 for any n we use.
    std::size_t uniform_index(std::size_t n) {
        return static_cast<std::size_t>(gen_() % n);
    }

    // Uniform in [-limit, limit).
    double uniform_symmetric(double limit) { return (2.0 * uniform() - 1.0) * limit; }

private:
    std::mt19937_64 gen_;
};

}  // namespace tsc
