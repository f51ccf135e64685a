#pragma once

#include "meglab/exploration.hpp"
#include "meglab/linalg.hpp"
#include "meglab/mdp.hpp"
#include "meglab/oracle.hpp"

#include <string>
#include <vector>

namespace meglab {

// Linear MDP over a finite carrier: P_h(s'|s,a) = <phi_h(s,a), nu_h(s')> and
// R_h(s,a) = <phi_h(s,a), theta_h>. The measure is called nu to keep it apart
// from occupancy mu. Normalizations: ||phi|| <= 1, ||nu(s)|| <= sqrt(d),
// ||theta|| <= sqrt(d), entries of phi and nu nonnegative.
struct LinearMDP {
    int num_states = 0;
    int num_actions = 0;
    int horizon = 0;
    int initial_state = 0;
    int dim = 0;
    FeatureMap phi;                   // [h][s][a] -> R^d
    std::vector<std::vector<Vec>> nu; // [h][s'] -> R^d
    std::vector<Vec> theta;           // [h] -> R^d
};

ValidationReport validate_linear(const LinearMDP& lm);

// Materializes <phi, nu> transitions and <phi, theta> rewards; the output
// passes validate_mdp whenever the linear invariants hold.
TabularMDP to_tabular(const LinearMDP& lm);

// One-hot embedding with d = S*A; to_tabular(embed_tabular(M)) round-trips M.
LinearMDP embed_tabular(const TabularMDP& mdp);

struct CovarianceMatrix {
    Mat m;
    int h = 0; // step the features were taken at (0-based)
    std::string policy_desc;
};

// Phi_h^pi = sum_{s,a} mu_h^pi(s,a) phi_h(s,a) phi_h(s,a)^T with exact
// occupancies on the tabular realization.
CovarianceMatrix feature_covariance(const LinearMDP& lm, const MarkovPolicy& pi, int h);
CovarianceMatrix feature_covariance(const LinearMDP& lm, const MixturePolicy& pi, int h);

// Smallest eigenvalue via cyclic Jacobi rotations.
double min_eigenvalue(const CovarianceMatrix& cov);

struct LinearTaskSet {
    std::vector<LinearMDP> tasks;
    std::vector<std::string> ids;
};

// d*H tasks sharing phi and nu; task (i,h) has theta_h = e_i and zero reward
// parameters elsewhere.
LinearTaskSet gen_diverse_linear(const LinearMDP& dynamics);

struct DirectionValue {
    Vec direction;
    double value = 0.0; // max_pi E_pi[direction^T phi_h]
};

struct CoverageB1 {
    double b1 = 0.0;
    std::vector<DirectionValue> table;
};

// Certificate over a finite direction set only (the d basis vectors plus
// seeded random positive unit vectors): for each tested direction nu,
// max_pi E_pi[nu^T phi_h(s_h, a_h)] by exact backward DP; b1 is the minimum.
CoverageB1 coverage_b1(const LinearMDP& lm, int h, int num_random_directions = 100,
                       std::uint64_t seed = 0);

struct LemmaLinear2Result {
    int h = 0;          // step of the diverse tasks (0-based)
    double lhs = 0.0;   // lambda_min(Phi_{h+1} of the explored mixture)
    double rhs = 0.0;   // eps_h prod_{h'<h}(1-eps_h') b1^2 / (2dA)
    double margin = 0.0;
    bool degenerate = false; // some task's optimal value is 0 (goal unreachable)
};

// Forms Mixture({expl(pi_i)}) from the exact optimal policies of the d step-h
// tasks and compares lambda_min of the step-(h+1) feature covariance against
// the schedule-product bound.
LemmaLinear2Result check_lemma_linear2(const std::vector<LinearMDP>& step_h_tasks, int h,
                                       const ExplorationSchedule& sched, double b1);

} // namespace meglab
