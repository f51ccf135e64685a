#pragma once

#include "meglab/exploration.hpp"
#include "meglab/mdp.hpp"
#include "meglab/oracle.hpp"
#include "meglab/tasks.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace meglab {

struct RunLogRow {
    int round;              // 1-based
    int task;               // index into the task set
    double greedy_value;    // exact V of this round's greedy policy
    double optimal_value;   // exact V*
    std::int64_t episodes_total; // across all tasks after this round
};

struct RunLog {
    std::uint64_t seed = 0;
    int num_tasks = 0;
    int rounds = 0;
    std::string config_echo;
    std::vector<double> optimal_values;   // per task
    std::vector<RunLogRow> rows;          // eval rounds only, task-major within round
    // Greedy action tables for every round (not just eval rounds):
    // greedy_actions[round-1][task][h * S + s].
    std::vector<std::vector<std::vector<std::uint8_t>>> greedy_actions;
    // Final per-task datasets, kept only when RunOptions::keep_datasets.
    std::vector<Dataset> datasets;
};

struct RunOptions {
    int eval_every = 1;
    // Stop as soon as every task's greedy policy is beta-optimal (checked on
    // eval rounds). The log keeps its prefix property either way.
    std::optional<double> stop_when_beta_optimal;
    std::string config_echo;
    bool keep_datasets = false;
};

// One round: fit FQI per task on its own data, wrap each greedy policy with
// the epsilon schedule, mix them uniformly, then collect one episode per task
// with the shared mixture. Episode randomness comes from a sub-stream derived
// from (seed, round, task), so results do not depend on collection order.
RunLog run_algorithm1(const TaskSet& tasks, const ExplorationSchedule& sched, int rounds,
                      std::uint64_t seed, const RunOptions& options = {});

// Smallest logged round at which every task is beta-optimal; nullopt if none.
std::optional<int> sample_complexity(const RunLog& log, double beta);

enum class ReturnMode { MixtureGreedy, FinalGreedy };

// Per-task returned policy: the uniform mixture of all rounds' greedy
// policies, or just the last round's (a singleton mixture).
std::vector<MixturePolicy> returned_policy(const RunLog& log, const TaskSet& tasks,
                                           ReturnMode mode);

// Exact value of the returned policy on each task.
std::vector<double> returned_policy_values(const RunLog& log, const TaskSet& tasks,
                                           ReturnMode mode);

struct CurriculumResult {
    MarkovPolicy policy;
    std::int64_t episodes_used = 0;
    bool success = false; // final policy exactly optimal for the last task
    std::vector<std::int64_t> phase_episodes;
};

// Known-curriculum learner for deterministic shared-transition task
// sequences: phase t explores with the constant-epsilon (1/t) greedy of the
// previous phase's policy, collects ceil(4*A*t*log(H/delta)) episodes on task
// t, and refits from that phase's data alone.
CurriculumResult run_curriculum(const TaskSet& ordered_tasks, double delta, std::uint64_t seed);

} // namespace meglab
