#include "meglab/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace meglab::rng {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
}

} // namespace

std::uint64_t derive(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t x = master;
    std::uint64_t key = splitmix64(x);
    for (std::uint64_t component : path) {
        x = key ^ (component + 0x9E3779B97F4A7C15ULL);
        key = splitmix64(x);
    }
    return key;
}

Stream::Stream(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& s : state_) s = splitmix64(x);
}

std::uint64_t Stream::next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Stream::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

int Stream::next_int(int n) {
    if (n < 1) throw std::invalid_argument("Stream::next_int: n must be >= 1");
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return static_cast<int>(v % un);
}

double Stream::next_gaussian() {
    if (has_cached_gaussian_) {
        has_cached_gaussian_ = false;
        return cached_gaussian_;
    }
    double u1;
    do {
        u1 = next_double();
    } while (u1 <= 0.0);
    const double u2 = next_double();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    cached_gaussian_ = radius * std::sin(angle);
    has_cached_gaussian_ = true;
    return radius * std::cos(angle);
}

int Stream::sample_discrete(std::span<const double> probs) {
    if (probs.empty()) throw std::invalid_argument("Stream::sample_discrete: empty vector");
    const double u = next_double();
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        cum += probs[i];
        if (u < cum) return static_cast<int>(i);
    }
    // u landed in the rounding slack past the last cumulative sum.
    return static_cast<int>(probs.size()) - 1;
}

} // namespace meglab::rng
