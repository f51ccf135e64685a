#pragma once

#include "meglab/exploration.hpp"
#include "meglab/mdp.hpp"
#include "meglab/tasks.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace meglab {

// Raised when the deterministic-policy enumeration would exceed the cap.
// MEG is a verification tool here, so there is no sampling fallback.
struct EnumerationCapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MEGResult {
    double alpha = 0.0;
    double c = 1.0;
    int task_index = -1;
    MarkovPolicy improved_policy;
    bool feasible = false;
};

// Joint value function over all tasks plus the witnessed suboptimality level
// beta: at least one task's greedy policy is beta-suboptimal (exact DP).
struct SuboptimalJoint {
    std::vector<QFunction> fs;
    double beta = 0.0;
};

// V*_1(s1) - V^{greedy(f_j)}_1(s1) per task, by exact DP.
std::vector<double> suboptimality_levels(const std::vector<QFunction>& fs, const TaskSet& tasks);

// Builds the joint and sets beta to the largest witnessed suboptimality.
// Throws if every greedy policy is optimal (the joint would not certify any
// membership in a beta-suboptimal class).
SuboptimalJoint make_suboptimal_joint(std::vector<QFunction> fs, const TaskSet& tasks);

// Worst-case occupancy ratio max(1, max_{s,a,h} mu_target / mu_behavior)
// with 0/0 -> 0 and x/0 -> infinity for x > 0.
double concentrability(const TabularMDP& mdp, const MarkovPolicy& behavior,
                       const MarkovPolicy& target);
double concentrability_ratio(const OccupancyTensor& target, const OccupancyTensor& behavior);

// Per-(joint, task set, schedule) quantities shared by the MEG computations:
// the behavior mixture Mixture({expl(greedy(f_j))}) evaluated on each task,
// the greedy values, and the concentrability constraint contributed by each
// task's own greedy policy (which does not depend on the candidate).
struct MegBehavior {
    std::vector<MarkovPolicy> greedy;
    std::vector<OccupancyTensor> behavior_mu;
    std::vector<double> greedy_value;
    std::vector<double> c_fixed;
};

MegBehavior meg_behavior(const SuboptimalJoint& joint, const TaskSet& tasks,
                         const ExplorationSchedule& sched);

// (V^{pi} - V^{greedy_j}) / sqrt(c) for an arbitrary candidate policy, or
// nullopt when no finite c satisfies the concentrability constraints.
std::optional<double> meg_candidate(const TabularMDP& task, const MegBehavior& behavior,
                                    int task_index, const MarkovPolicy& pi_tilde);

// Exact Multitask MEG over the class of deterministic Markovian candidate
// policies (exhaustive enumeration; the restriction is this operation's
// contract). Requires A^(S*H) <= cap, else throws EnumerationCapError.
MEGResult meg_exact(const SuboptimalJoint& joint, const TaskSet& tasks,
                    const ExplorationSchedule& sched, std::uint64_t cap = std::uint64_t{1} << 20);

struct SparseGoal {
    int state = 0;
    int action = 0;
    int h = 0;
};

// The single rewarded (s,a,h) cell when the MDP has one, with reward 1.
std::optional<SparseGoal> detect_sparse_goal(const TabularMDP& mdp);

// Upper bound sqrt(mu^{expl(greedy(f))}_h(goal)); refuses MDPs whose reward
// structure is not single-goal sparse.
double meg_upper_sparse(const TabularMDP& mdp, const SparseGoal& goal, const QFunction& f,
                        const ExplorationSchedule& sched);

struct Prop1Result {
    MEGResult multitask;
    std::vector<MEGResult> singles;
};

// Both sides of alpha(f, M, F) >= max_M alpha(f_M, {M}, F) / sqrt(|M|).
Prop1Result check_prop1(const SuboptimalJoint& joint, const TaskSet& tasks,
                        const ExplorationSchedule& sched,
                        std::uint64_t cap = std::uint64_t{1} << 20);

// --- Diverse task-set generators -----------------------------------------

struct HallwayInstance {
    TabularMDP base; // shared deterministic chain, zero rewards
    TaskSet diverse; // N tasks; task i pays 1 when move i lands on state i
};

// Line of N+1 states, start at 0, A = 2 (action 0 steps back, action 1 steps
// forward, clamped at the ends), H = N. Task i's reward sits on the forward
// move out of state i-1 at step i, so solving it takes exactly i forward
// moves; the single-task variant is the last task (goal at the far end).
HallwayInstance gen_hallway(int n);

// S*H tasks over the base transitions; task (s,h) pays 1 for every action
// taken in state s at step h (0-based), 0 elsewhere.
TaskSet gen_sparse_set(const TabularMDP& base);

// Recovers (s, h) from an all-action sparse task's reward tensor.
std::optional<std::pair<int, int>> detect_sparse_state_goal(const TabularMDP& task);

// max over policies of Pr(s_h = target) -- optimal-reach DP, h 0-based.
double max_reach_probability(const TabularMDP& mdp, int target_state, int target_h);

struct CoverageResult {
    double b1 = 0.0;
    std::vector<std::pair<int, int>> unreachable; // (s, h) with max reach 0
};

// b1 = min over reachable (s,h) of max_pi mu_h^pi(s). When nothing beyond the
// start cell is reachable the convention is b1 = +infinity.
CoverageResult coverage_constant(const TabularMDP& base);

// Mirror construction: appends an absorbing zero-reward dummy state (index
// S) and, sweeping h forward, redirects into the dummy all incoming mass of
// any state whose best achievable visit probability at step h+1 is <= beta;
// reachability is recomputed on the partially updated kernel, states
// processed in ascending index order. The result satisfies the occupancy
// lower-bound dichotomy: every non-dummy (s,h) has max reach 0 or > beta.
TabularMDP mirror_transform(const TabularMDP& base, double beta);

} // namespace meglab
