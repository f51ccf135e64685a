#include <doctest.h>

#include "meglab/rng.hpp"

#include <cmath>
#include <vector>

using namespace meglab;

TEST_CASE("stream is deterministic for a fixed seed") {
    rng::Stream a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("derive separates paths") {
    const auto k1 = rng::derive(7, {1, 2, 3});
    const auto k2 = rng::derive(7, {1, 2, 4});
    const auto k3 = rng::derive(7, {1, 2, 3});
    CHECK(k1 != k2);
    CHECK(k1 == k3);
}

TEST_CASE("uniform ints respect the bound and hit every residue") {
    rng::Stream s(1);
    std::vector<int> counts(5, 0);
    for (int i = 0; i < 5000; ++i) {
        const int v = s.next_int(5);
        REQUIRE(v >= 0);
        REQUIRE(v < 5);
        ++counts[v];
    }
    for (int c : counts) CHECK(c > 800); // ~1000 expected per bucket
}

TEST_CASE("gaussian moments") {
    rng::Stream s(3);
    double sum = 0.0, sum_sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double g = s.next_gaussian();
        sum += g;
        sum_sq += g * g;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sum_sq / n - 1.0) < 0.02);
}

TEST_CASE("discrete sampling tracks the distribution") {
    rng::Stream s(9);
    const std::vector<double> probs = {0.2, 0.5, 0.3};
    std::vector<int> counts(3, 0);
    const int n = 60000;
    for (int i = 0; i < n; ++i) ++counts[s.sample_discrete(probs)];
    for (int k = 0; k < 3; ++k)
        CHECK(std::abs(counts[k] / static_cast<double>(n) - probs[k]) < 0.01);
}
