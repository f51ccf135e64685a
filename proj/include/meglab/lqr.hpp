#pragma once

#include "meglab/exploration.hpp"
#include "meglab/linalg.hpp"
#include "meglab/rng.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace meglab {

// Raised when Ra + B^T P B fails to be negative definite during the backward
// pass; the reward maximization has no finite optimum at that step.
struct IllPosedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Finite-horizon deterministic-dynamics LQR posed as reward maximization:
// s_{h+1} = A_h s_h + B_h a_h, r_h(s,a) = s^T Rs_h s + a^T Ra_h a with Ra_h
// negative definite.
struct LQRSystem {
    int dim_state = 0;
    int dim_action = 0;
    int horizon = 0;
    std::vector<Mat> A;  // H entries, d_s x d_s
    std::vector<Mat> B;  // H entries, d_s x d_a
    std::vector<Mat> Rs; // H entries, symmetric d_s x d_s
    std::vector<Mat> Ra; // H entries, symmetric d_a x d_a
    Vec initial_state;

    void validate() const;
};

struct RiccatiSolution {
    std::vector<Mat> P; // H+1 entries, P[H] = 0
    std::vector<Mat> F; // H entries, d_a x d_s
};

// Backward recursion with K_h = Ra_h + B_h^T P_{h+1} B_h:
//   F_h = -K_h^{-1} B_h^T P_{h+1} A_h,
//   P_h = Rs_h + A_h^T P_{h+1} A_h + A_h^T P_{h+1} B_h F_h,
// P symmetrized each step. Throws IllPosedError when K_h is not negative
// definite, reporting its largest eigenvalue.
RiccatiSolution riccati(const LQRSystem& sys);

// Return of the deterministic closed loop a_h = F_h s_h from s1, via exact
// backward quadratic propagation.
double lqr_value(const LQRSystem& sys, const std::vector<Mat>& gains, const Vec& s1);

// Forward simulation of the same closed loop; used as the rollout oracle.
double lqr_rollout(const LQRSystem& sys, const std::vector<Mat>& gains, const Vec& s1);

struct LQRTaskSet {
    std::vector<LQRSystem> tasks;
    std::vector<std::string> ids;
};

// d_s*H tasks over shared (A, B): task (i,h) has Rs zero except e_i e_i^T at
// step h, and Ra = -I throughout.
LQRTaskSet gen_diverse_lqr(const std::vector<Mat>& A, const std::vector<Mat>& B, int horizon,
                           const Vec& initial_state);

// Exact second moment E[s_t s_t^T] at step t (0-based; t transitions from
// s1) under the episode-level mixture of Gaussian-explored gain policies.
// Per member the explore branch replaces the action by N(0, sigma^2 I) noise
// (or adds it, in additive mode), contributing sigma^2 B B^T.
Mat state_covariance(const LQRSystem& sys, const std::vector<std::vector<Mat>>& mixture_gains,
                     const ExplorationSchedule& sched, int t, bool additive = false);

struct LqrRegularity {
    double b3 = 0.0; // min over tested directions of max_pi E[s_h^T nu], ||a|| <= 1
    double b4 = 0.0; // max over policies of max_h ||s_h|| along the closed loop
    double b5 = 0.0; // same for actions
    struct Entry {
        int h;
        Vec direction;
        double value;
    };
    std::vector<Entry> b3_table;
};

// b3 is certified over a direction test set (basis vectors, their negations,
// and seeded random unit vectors); the per-step maxima are exact because the
// ||a|| <= 1 maximizer of a linear objective is the scaled gradient
// direction.
LqrRegularity lqr_regularity(const LQRSystem& sys, const std::vector<std::vector<Mat>>& policies,
                             int num_random_directions = 50, std::uint64_t seed = 0);

// Bellman-optimality residual of a Riccati solution at random states/steps:
// compares s^T P_h s with r(s, Fs) + V_{h+1}(As + B Fs) and with a dense
// action grid around the analytic maximizer. Returns the largest violation.
double riccati_optimality_check(const LQRSystem& sys, const RiccatiSolution& sol, int trials,
                                std::uint64_t seed = 0, int grid_points_per_axis = 7);

} // namespace meglab
