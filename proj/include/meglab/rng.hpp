#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>

namespace meglab::rng {

// Counter-style key derivation: mixing the master seed with a path of
// integers (seed index, round, task, ...) yields independent stream keys, so
// adding parallelism never reorders draws.
std::uint64_t derive(std::uint64_t master, std::initializer_list<std::uint64_t> path);

// Self-contained xoshiro256** stream. All sampling helpers are hand-rolled
// (no std::*_distribution) so that sequences are identical across compilers.
class Stream {
public:
    explicit Stream(std::uint64_t seed);

    std::uint64_t next_u64();
    // Uniform in [0, 1), 53-bit resolution.
    double next_double();
    // Uniform integer in [0, n), n >= 1. Rejection sampling, unbiased.
    int next_int(int n);
    // Standard normal via Box-Muller (pairs cached).
    double next_gaussian();
    // Index sampled from a probability vector (assumed to sum to ~1).
    int sample_discrete(std::span<const double> probs);

private:
    std::uint64_t state_[4];
    double cached_gaussian_ = 0.0;
    bool has_cached_gaussian_ = false;
};

} // namespace meglab::rng
