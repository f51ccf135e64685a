#pragma once

#include "meglab/engine.hpp"
#include "meglab/io.hpp"
#include "meglab/linear.hpp"
#include "meglab/lqr.hpp"
#include "meglab/meg.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace meglab::harness {

// --- Random instance families used by the verification suites --------------

// Strictly positive transition rows (every state reachable) and rewards
// rescaled so the best cumulative reward is <= 1.
TabularMDP random_dense_mdp(int num_states, int num_actions, int horizon, rng::Stream& stream);

// Dense rows mixed with point-mass rows; produces low-reach states that
// exercise the mirror construction.
TabularMDP random_patchy_mdp(int num_states, int num_actions, int horizon, rng::Stream& stream);

MarkovPolicy random_stochastic_policy(int num_states, int num_actions, int horizon,
                                      rng::Stream& stream);

QFunction random_q(int num_states, int num_actions, int horizon, rng::Stream& stream);

// Retries random joints until at least one greedy policy is suboptimal.
SuboptimalJoint random_suboptimal_joint(const TaskSet& tasks, rng::Stream& stream);

// Well-posed by construction: Rs negative semidefinite keeps every K_h
// dominated by Ra.
LQRSystem random_wellposed_lqr(int dim_state, int dim_action, int horizon, rng::Stream& stream);

// --- Run drivers ------------------------------------------------------------

struct MtrlRunSummary {
    std::vector<std::optional<int>> per_seed_complexity;
    double success_fraction = 0.0;
    std::optional<double> median_complexity;
};

MtrlRunSummary summarize_complexities(const std::vector<std::optional<int>>& per_seed);

// Runs Algorithm 1 for each seed (optionally across worker threads), writes
// runlog_seed<k>.csv per seed plus summary.json, and returns the summary.
// With export_datasets, each seed also gets dataset_seed<k>_task<j>.csv.
MtrlRunSummary run_mtrl(const TaskSet& tasks, const ExplorationSchedule& sched, int rounds,
                        double beta, const std::vector<std::uint64_t>& seeds,
                        const std::filesystem::path& out_dir, int workers,
                        const std::string& config_echo, bool early_stop = true,
                        int eval_every = 1, bool export_datasets = false);

struct CurriculumSummary {
    std::vector<bool> per_seed_success;
    std::vector<std::int64_t> per_seed_episodes;
    double success_fraction = 0.0;
};

CurriculumSummary run_curriculum_sweep(const TaskSet& ordered_tasks, double delta,
                                       const std::vector<std::uint64_t>& seeds,
                                       const std::filesystem::path& out_dir, int workers);

// --- Audit suites ------------------------------------------------------------

struct CheckLine {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct AuditReport {
    std::string kind;
    std::vector<CheckLine> checks;

    bool all_pass() const;
    std::string to_text() const;
    io::json to_json() const;
};

// Hallway single-task MEG bound alpha <= 2^(-H/2) for the always-backward
// greedy under the 1/(h+1) schedule; meg_exact included where enumerable.
AuditReport audit_hallway_meg(const std::vector<int>& sizes = {6, 8, 10},
                              std::uint64_t cap = std::uint64_t{1} << 20);

// alpha(f, M, F) >= max_M alpha(f_M, {M}, F) / sqrt(|M|) on random instances.
AuditReport audit_prop1(int instances = 50, std::uint64_t master_seed = 101);

// meg_exact <= meg_upper_sparse on random single-goal sparse instances.
AuditReport audit_prop2(int instances = 30, std::uint64_t master_seed = 202);

// Sparse-set MEG lower bound at the proof's critical layer under the 1/h
// schedule, with the survival factor (1-eps_h)^(h-1) eps_h evaluated exactly.
AuditReport audit_sparse_lower_bound(int instances = 10, std::uint64_t master_seed = 303);

// Value-difference inequality on random (M, f, pi') triples.
AuditReport audit_value_difference(int triples = 100, std::uint64_t master_seed = 404);

// Mirror-MDP propositions: post-transform reach dichotomy, occupancy
// preservation, and the dummy-state occupancy cap.
AuditReport audit_mirror(int bases = 20, const std::vector<double>& betas = {0.05, 0.2},
                         int policies_per_instance = 100, std::uint64_t master_seed = 505);

// lambda_min lower bound for explored optimal-policy mixtures on one-hot
// embedded random instances, every step.
AuditReport audit_lemma_linear2(int instances = 20, std::uint64_t master_seed = 606);

// Riccati optimality residuals, gain dominance, and the H = 1 terminal case.
AuditReport audit_lqr(int systems = 50, int gain_trials = 100, std::uint64_t master_seed = 707);

// Sorted-eigenvalue CSVs (policy,h,index,eigenvalue with 1-based h): feature
// covariances of the diverse tasks' explored optimal-policy mixtures at each
// step, and their LQR state-covariance analogue.
std::string linear_mixture_spectra_csv(const LinearMDP& lm, const ExplorationSchedule& sched);
std::string lqr_mixture_spectra_csv(const LQRSystem& sys, const ExplorationSchedule& gaussian_sched);

// Curriculum success rate on the hallway within the phase budgets.
AuditReport audit_curriculum(int hallway_n = 12, double delta = 0.1, int num_seeds = 20,
                             int min_successes = 18, const std::filesystem::path& out_dir = {},
                             int workers = 1);

struct SeparationReport {
    AuditReport audit;
    std::vector<int> sizes;
    std::vector<std::optional<double>> multitask_median;
    double loglog_slope = 0.0;
    int single_task_failures = 0;
};

// The exponential-vs-polynomial separation experiment: diverse hallway
// multitask runs for each N plus the single-task variant at the largest N.
SeparationReport audit_separation(const std::vector<int>& sizes = {4, 6, 8, 10}, int seeds = 10,
                                  int budget = 10000, double beta = 0.05,
                                  const std::filesystem::path& out_dir = {}, int workers = 1);

int env_worker_count();

} // namespace meglab::harness
