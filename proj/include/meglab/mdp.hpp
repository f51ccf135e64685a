#pragma once

#include "meglab/rng.hpp"

#include <string>
#include <vector>

namespace meglab {

// Finite episodic MDP. Steps are 0-based internally: h runs over 0..H-1 and
// an episode visits states s_0 (the fixed initial state) through s_H.
struct TabularMDP {
    int num_states = 0;
    int num_actions = 0;
    int horizon = 0;
    int initial_state = 0;
    // P[h][s][a] is a probability vector over next states.
    std::vector<std::vector<std::vector<std::vector<double>>>> transitions;
    // R[h][s][a] in [0, 1].
    std::vector<std::vector<std::vector<double>>> rewards;

    static TabularMDP zeros(int num_states, int num_actions, int horizon, int initial_state = 0);
};

// Per-step stochastic action rule: probs[h][s] is a distribution over actions.
struct MarkovPolicy {
    std::vector<std::vector<std::vector<double>>> probs;

    static MarkovPolicy uniform(int num_states, int num_actions, int horizon);
    // actions[h][s] gives the single action taken.
    static MarkovPolicy deterministic(const std::vector<std::vector<int>>& actions, int num_actions);
};

// Episode-level uniform mixture: one member is drawn per episode and used
// throughout.
struct MixturePolicy {
    std::vector<MarkovPolicy> members;
};

struct Episode {
    struct Step {
        int h;
        int state;
        int action;
        double reward;
        int next_state;
    };
    std::vector<Step> steps;
};

// Q tables with an extra all-zero layer at h = H so Bellman backups read
// uniformly off the end.
struct QFunction {
    std::vector<std::vector<std::vector<double>>> q;

    static QFunction zeros(int num_states, int num_actions, int horizon);
    int horizon() const { return static_cast<int>(q.size()) - 1; }
};

struct OccupancyTensor {
    // mu[h][s][a], each layer sums to 1.
    std::vector<std::vector<std::vector<double>>> mu;
};

struct ValidationReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;

    bool empty() const { return errors.empty() && warnings.empty(); }
    bool hard_ok() const { return errors.empty(); }
};

struct PolicyEvaluation {
    QFunction q;
    std::vector<std::vector<double>> v; // v[h][s], h in 0..H
    double return_value = 0.0;          // v[0][initial_state]
};

struct OptimalValues {
    QFunction q;
    MarkovPolicy greedy;
    std::vector<std::vector<double>> v;
};

struct ValueDifference {
    double lhs = 0.0;
    double rhs = 0.0;
};

// Checks stochasticity rows (1e-12), reward range, and the normalization that
// the best achievable cumulative reward stays <= 1 (reported as a warning:
// generators in this repo satisfy it, user MDPs may opt out). Dimension
// mismatches throw std::invalid_argument naming the offending axis.
ValidationReport validate_mdp(const TabularMDP& mdp);

// Largest cumulative reward over all positive-probability paths (max-DP).
double max_cumulative_reward(const TabularMDP& mdp);

PolicyEvaluation evaluate_policy(const TabularMDP& mdp, const MarkovPolicy& pi);

// Backward induction; greedy ties break toward the lowest action index.
OptimalValues optimal_values(const TabularMDP& mdp);

MarkovPolicy greedy_policy(const QFunction& f);

OccupancyTensor occupancy(const TabularMDP& mdp, const MarkovPolicy& pi);
// Uniform average of member occupancies (episode-level mixture semantics).
OccupancyTensor occupancy(const TabularMDP& mdp, const MixturePolicy& pi);

Episode sample_episode(const TabularMDP& mdp, const MarkovPolicy& pi, rng::Stream& stream);
// Draws the member first, then runs it for the whole episode.
Episode sample_episode(const TabularMDP& mdp, const MixturePolicy& pi, rng::Stream& stream);

// (E_h f)(s,a) = f_h(s,a) - R_h(s,a) - sum_s' P_h(s'|s,a) max_a' f_{h+1}(s',a').
std::vector<std::vector<double>> bellman_residual(const TabularMDP& mdp, const QFunction& f, int h);

// Both sides of the value-difference bound
//   V^pi'(s0) - V^{greedy(f)}(s0)
//     <= sum_h E_{greedy(f)}[E_h f] - sum_h E_{pi'}[E_h f];
// callers assert lhs <= rhs + tolerance.
ValueDifference value_difference_check(const TabularMDP& mdp, const QFunction& f,
                                       const MarkovPolicy& pi_prime);

// Shape guards shared across modules; throw std::invalid_argument.
void require_valid_mdp(const TabularMDP& mdp);
void require_policy_shape(const TabularMDP& mdp, const MarkovPolicy& pi);
void require_q_shape(const TabularMDP& mdp, const QFunction& f);

} // namespace meglab
