#include <doctest.h>

#include "meglab/harness.hpp"
#include "meglab/lqr.hpp"

#include <cmath>

using namespace meglab;

namespace {

LQRSystem scalar_system(double a, double b, double rs, double ra, int horizon) {
    LQRSystem sys;
    sys.dim_state = 1;
    sys.dim_action = 1;
    sys.horizon = horizon;
    for (int h = 0; h < horizon; ++h) {
        Mat am(1, 1), bm(1, 1), rsm(1, 1), ram(1, 1);
        am(0, 0) = a;
        bm(0, 0) = b;
        rsm(0, 0) = rs;
        ram(0, 0) = ra;
        sys.A.push_back(am);
        sys.B.push_back(bm);
        sys.Rs.push_back(rsm);
        sys.Ra.push_back(ram);
    }
    sys.initial_state = {1.0};
    return sys;
}

} // namespace

TEST_CASE("riccati: H=1 gives P = Rs and zero gain") {
    rng::Stream stream(3);
    const LQRSystem sys = harness::random_wellposed_lqr(3, 2, 1, stream);
    const RiccatiSolution sol = riccati(sys);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(sol.P[0](i, j) == sys.Rs[0](i, j));
    for (double v : sol.F[0].a) CHECK(v == 0.0);
}

TEST_CASE("riccati: zero state rewards give zero P and zero gains") {
    rng::Stream stream(5);
    LQRSystem sys = harness::random_wellposed_lqr(2, 2, 4, stream);
    for (auto& rs : sys.Rs) rs = Mat(2, 2);
    const RiccatiSolution sol = riccati(sys);
    for (const auto& p : sol.P)
        for (double v : p.a) CHECK(v == 0.0);
    for (const auto& f : sol.F)
        for (double v : f.a) CHECK(v == 0.0);
}

TEST_CASE("riccati: scalar closed form for A=B=1, Rs=0.5, Ra=-1, H=2") {
    // Hand recursion: P2 = 0.5, K2 = -1, F2 = 0; K1 = -0.5, F1 = 1, P1 = 1.5.
    const LQRSystem sys = scalar_system(1.0, 1.0, 0.5, -1.0, 2);
    const RiccatiSolution sol = riccati(sys);
    CHECK(sol.P[1](0, 0) == doctest::Approx(0.5));
    CHECK(sol.F[1](0, 0) == doctest::Approx(0.0));
    CHECK(sol.F[0](0, 0) == doctest::Approx(1.0));
    CHECK(sol.P[0](0, 0) == doctest::Approx(1.5));
    CHECK(lqr_value(sys, sol.F, sys.initial_state) == doctest::Approx(1.5));
}

TEST_CASE("riccati: Rs=1 with A=B=1 over two steps sits on the posedness boundary") {
    // P2 = 1 makes K1 = Ra + B'P2B = 0: the maximization degenerates and the
    // solver must refuse rather than divide by the singular K.
    const LQRSystem sys = scalar_system(1.0, 1.0, 1.0, -1.0, 2);
    CHECK_THROWS_AS(riccati(sys), IllPosedError);
    try {
        riccati(sys);
    } catch (const IllPosedError& e) {
        CHECK(std::string(e.what()).find("ill-posed maximization at step 0") != std::string::npos);
    }
}

TEST_CASE("lqr_value: riccati gains reproduce s1' P1 s1") {
    rng::Stream stream(7);
    for (int trial = 0; trial < 10; ++trial) {
        const int ds = 1 + stream.next_int(3);
        const int da = 1 + stream.next_int(3);
        const int H = 1 + stream.next_int(4);
        const LQRSystem sys = harness::random_wellposed_lqr(ds, da, H, stream);
        const RiccatiSolution sol = riccati(sys);
        CHECK(lqr_value(sys, sol.F, sys.initial_state) ==
              doctest::Approx(quad_form(sol.P[0], sys.initial_state)).epsilon(1e-10));
    }
}

TEST_CASE("lqr_value: zero gains and zero state rewards give zero") {
    rng::Stream stream(11);
    LQRSystem sys = harness::random_wellposed_lqr(2, 1, 3, stream);
    for (auto& rs : sys.Rs) rs = Mat(2, 2);
    const std::vector<Mat> gains(3, Mat(1, 2));
    CHECK(lqr_value(sys, gains, sys.initial_state) == 0.0);
}

TEST_CASE("lqr_value agrees with the forward rollout oracle on random gains") {
    rng::Stream stream(13);
    for (int trial = 0; trial < 20; ++trial) {
        const int ds = 1 + stream.next_int(3);
        const int da = 1 + stream.next_int(3);
        const int H = 1 + stream.next_int(5);
        const LQRSystem sys = harness::random_wellposed_lqr(ds, da, H, stream);
        std::vector<Mat> gains;
        for (int h = 0; h < H; ++h) {
            Mat f(da, ds);
            for (auto& v : f.a) v = stream.next_gaussian();
            gains.push_back(std::move(f));
        }
        const double via_backward = lqr_value(sys, gains, sys.initial_state);
        const double via_rollout = lqr_rollout(sys, gains, sys.initial_state);
        CHECK(via_backward == doctest::Approx(via_rollout).epsilon(1e-10));
    }
}

TEST_CASE("gen_diverse_lqr: d_s*H tasks with the expected reward placement") {
    rng::Stream stream(17);
    const LQRSystem proto = harness::random_wellposed_lqr(2, 2, 2, stream);
    const LQRTaskSet tasks = gen_diverse_lqr(proto.A, proto.B, 2, proto.initial_state);
    CHECK(tasks.tasks.size() == 4);
    for (const auto& task : tasks.tasks) {
        task.validate();
        // Ra = -I throughout.
        for (const auto& ra : task.Ra)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) CHECK(ra(i, j) == (i == j ? -1.0 : 0.0));
    }
    // Task (i=1, h=0): Rs[0] = e1 e1', Rs[1] = 0.
    const LQRSystem& t = tasks.tasks[1];
    CHECK(t.Rs[0](1, 1) == 1.0);
    CHECK(t.Rs[0](0, 0) == 0.0);
    for (double v : t.Rs[1].a) CHECK(v == 0.0);

    // Posedness check runs (bounded dynamics here keep K negative definite);
    // a violation would throw and fail the test.
    for (const auto& task : tasks.tasks) {
        const RiccatiSolution sol = riccati(task);
        CHECK(static_cast<int>(sol.F.size()) == 2);
    }
}

TEST_CASE("state_covariance: no exploration over a deterministic gain is the rank-1 path moment") {
    rng::Stream stream(19);
    const LQRSystem sys = harness::random_wellposed_lqr(2, 1, 3, stream);
    const RiccatiSolution sol = riccati(sys);
    ExplorationSchedule sched = gaussian_schedule(3, {0.0, 0.0, 0.0}, {1.0, 1.0, 1.0});
    Vec s = sys.initial_state;
    for (int t = 0; t <= 3; ++t) {
        const Mat cov = state_covariance(sys, {sol.F}, sched, t);
        const Mat expected = outer(s, s);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                CHECK(cov(i, j) == doctest::Approx(expected(i, j)).epsilon(1e-10));
        if (t < 3) {
            const Vec a = mat_vec(sol.F[t], s);
            Vec next = mat_vec(sys.A[t], s);
            const Vec ba = mat_vec(sys.B[t], a);
            for (int i = 0; i < 2; ++i) next[i] += ba[i];
            s = next;
        }
    }
}

TEST_CASE("state_covariance: pure noise with zero dynamics is sigma^2 B B'") {
    rng::Stream stream(23);
    LQRSystem sys = harness::random_wellposed_lqr(2, 2, 2, stream);
    for (auto& a : sys.A) a = Mat(2, 2);
    const double sigma = 0.8;
    ExplorationSchedule sched = gaussian_schedule(2, {1.0, 1.0}, {sigma, sigma});
    const std::vector<Mat> zero_gains(2, Mat(2, 2));
    const Mat cov = state_covariance(sys, {zero_gains}, sched, 1);
    const Mat expected = (sigma * sigma) * (sys.B[0] * transpose(sys.B[0]));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(cov(i, j) == doctest::Approx(expected(i, j)).epsilon(1e-12));
}

TEST_CASE("state_covariance: additive mode keeps the closed loop and adds the noise term") {
    rng::Stream stream(53);
    const LQRSystem sys = harness::random_wellposed_lqr(2, 2, 2, stream);
    const RiccatiSolution sol = riccati(sys);
    const double eps = 0.3, sigma = 0.7;
    ExplorationSchedule sched =
        gaussian_schedule(2, std::vector<double>(2, eps), std::vector<double>(2, sigma));
    const Mat cov = state_covariance(sys, {sol.F}, sched, 1, /*additive=*/true);
    // One step from a deterministic start: L s1 s1' L' + eps sigma^2 B B'.
    const Mat loop = sys.A[0] + sys.B[0] * sol.F[0];
    const Vec pushed = mat_vec(loop, sys.initial_state);
    const Mat expected =
        outer(pushed, pushed) + (eps * sigma * sigma) * (sys.B[0] * transpose(sys.B[0]));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(cov(i, j) == doctest::Approx(expected(i, j)).epsilon(1e-10));

    // The additive policy's explore branch is gain response plus noise.
    const GaussianGainPolicy policy = gaussian_expl(sol.F, sched, /*additive=*/true);
    rng::Stream acts(7);
    double mean0 = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) mean0 += policy.act(0, sys.initial_state, acts)[0];
    mean0 /= n;
    const Vec gain_action = mat_vec(sol.F[0], sys.initial_state);
    CHECK(std::abs(mean0 - gain_action[0]) <= 0.02);
}

TEST_CASE("state_covariance: symmetric PSD with the exploration noise floor") {
    rng::Stream stream(29);
    for (int trial = 0; trial < 10; ++trial) {
        const int ds = 2, da = 2, H = 3;
        const LQRSystem sys = harness::random_wellposed_lqr(ds, da, H, stream);
        const LQRTaskSet tasks = gen_diverse_lqr(sys.A, sys.B, H, sys.initial_state);
        std::vector<std::vector<Mat>> gain_sets;
        for (int i = 0; i < ds; ++i) gain_sets.push_back(riccati(tasks.tasks[i]).F);
        const double eps = 0.3, sigma = 0.5;
        ExplorationSchedule sched =
            gaussian_schedule(H, std::vector<double>(H, eps), std::vector<double>(H, sigma));
        for (int t = 1; t <= H; ++t) {
            const Mat cov = state_covariance(sys, gain_sets, sched, t);
            CHECK(max_abs_asymmetry(cov) <= 1e-12);
            const auto eigs = jacobi_eigenvalues(cov);
            CHECK(eigs.front() >= -1e-9);
            const auto bbt_eigs = jacobi_eigenvalues(sys.B[t - 1] * transpose(sys.B[t - 1]));
            CHECK(eigs.front() >=
                  eps * sigma * sigma * bbt_eigs.front() / gain_sets.size() - 1e-9);
        }
    }
}

TEST_CASE("state_covariance: diverse-task mixtures keep the covariance full rank") {
    rng::Stream stream(31);
    int positive = 0, total = 0;
    for (int trial = 0; trial < 5; ++trial) {
        const int ds = 2, da = 2, H = 3;
        const LQRSystem sys = harness::random_wellposed_lqr(ds, da, H, stream);
        const LQRTaskSet tasks = gen_diverse_lqr(sys.A, sys.B, H, sys.initial_state);
        std::vector<std::vector<Mat>> gain_sets;
        for (int i = 0; i < ds; ++i) gain_sets.push_back(riccati(tasks.tasks[i]).F);
        ExplorationSchedule sched = gaussian_schedule(H, std::vector<double>(H, 0.4),
                                                      std::vector<double>(H, 1.0));
        for (int t = 1; t <= H; ++t) {
            ++total;
            const Mat cov = state_covariance(sys, gain_sets, sched, t);
            if (jacobi_eigenvalues(cov).front() > 0.0) ++positive;
        }
    }
    CHECK(positive == total);
}

TEST_CASE("lqr_regularity: scalar stable system has finite b4, zero B limits b3 to the autonomous reach") {
    const LQRSystem sys = scalar_system(0.5, 1.0, -0.1, -1.0, 4);
    const RiccatiSolution sol = riccati(sys);
    const LqrRegularity reg = lqr_regularity(sys, {sol.F}, 10, 3);
    CHECK(std::isfinite(reg.b4));
    CHECK(reg.b4 >= 1.0); // includes the initial state

    LQRSystem no_input = sys;
    for (auto& b : no_input.B) b = Mat(1, 1);
    const LqrRegularity reg0 = lqr_regularity(no_input, {std::vector<Mat>(4, Mat(1, 1))}, 10, 3);
    // With B = 0 the reachable set is the autonomous trajectory x_t = 0.5^t;
    // the worst tested direction is -e1 at the first step.
    CHECK(reg0.b3 == doctest::Approx(-0.5));
}

TEST_CASE("lqr_regularity: b3 matches a dense action-grid search within 2%") {
    rng::Stream stream(37);
    const LQRSystem sys = harness::random_wellposed_lqr(2, 1, 2, stream);
    const LqrRegularity reg = lqr_regularity(sys, {}, 8, 5);

    // Grid oracle over ||a|| <= 1 per step (d_a = 1: a in [-1, 1]).
    double grid_b3 = std::numeric_limits<double>::infinity();
    for (const auto& entry : reg.b3_table) {
        double best = -std::numeric_limits<double>::infinity();
        const int K = 401;
        if (entry.h == 1) {
            for (int i = 0; i < K; ++i) {
                const double a0 = -1.0 + 2.0 * i / (K - 1);
                Vec s = mat_vec(sys.A[0], sys.initial_state);
                for (int k = 0; k < 2; ++k) s[k] += sys.B[0](k, 0) * a0;
                best = std::max(best, dot(s, entry.direction));
            }
        } else {
            for (int i = 0; i < K; ++i)
                for (int j = 0; j < K; ++j) {
                    const double a0 = -1.0 + 2.0 * i / (K - 1);
                    const double a1 = -1.0 + 2.0 * j / (K - 1);
                    Vec s = mat_vec(sys.A[0], sys.initial_state);
                    for (int k = 0; k < 2; ++k) s[k] += sys.B[0](k, 0) * a0;
                    Vec s2 = mat_vec(sys.A[1], s);
                    for (int k = 0; k < 2; ++k) s2[k] += sys.B[1](k, 0) * a1;
                    best = std::max(best, dot(s2, entry.direction));
                }
        }
        CHECK(std::abs(best - entry.value) <= 0.02 * std::max(1.0, std::abs(entry.value)));
        grid_b3 = std::min(grid_b3, best);
    }
    CHECK(std::abs(grid_b3 - reg.b3) <= 0.02 * std::max(1.0, std::abs(reg.b3)));
}

TEST_CASE("riccati_optimality_check: tight residuals on scalar and random systems") {
    const LQRSystem scalar = scalar_system(1.0, 1.0, 0.5, -1.0, 2);
    const RiccatiSolution sol = riccati(scalar);
    CHECK(riccati_optimality_check(scalar, sol, 20, 5) <= 1e-10);

    rng::Stream stream(41);
    LQRSystem zero_rs = harness::random_wellposed_lqr(2, 2, 3, stream);
    for (auto& rs : zero_rs.Rs) rs = Mat(2, 2);
    const RiccatiSolution sol0 = riccati(zero_rs);
    CHECK(riccati_optimality_check(zero_rs, sol0, 20, 7) == 0.0);

    for (int trial = 0; trial < 10; ++trial) {
        const int ds = 1 + stream.next_int(3);
        const int da = 1 + stream.next_int(3);
        const int H = 1 + stream.next_int(4);
        const LQRSystem sys = harness::random_wellposed_lqr(ds, da, H, stream);
        CHECK(riccati_optimality_check(sys, riccati(sys), 30,
                                       rng::derive(43, {static_cast<std::uint64_t>(trial)})) <=
              1e-6);
    }
}

TEST_CASE("riccati value dominates random linear gains") {
    rng::Stream stream(47);
    for (int trial = 0; trial < 5; ++trial) {
        const LQRSystem sys = harness::random_wellposed_lqr(2, 2, 3, stream);
        const RiccatiSolution sol = riccati(sys);
        const double optimal = quad_form(sol.P[0], sys.initial_state);
        for (int g = 0; g < 100; ++g) {
            std::vector<Mat> gains;
            for (int h = 0; h < 3; ++h) {
                Mat f(2, 2);
                for (auto& v : f.a) v = stream.next_gaussian();
                gains.push_back(std::move(f));
            }
            CHECK(lqr_value(sys, gains, sys.initial_state) <= optimal + 1e-8);
        }
    }
}
