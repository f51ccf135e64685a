#pragma once

#include "meglab/linalg.hpp"
#include "meglab/mdp.hpp"

#include <cstdint>
#include <vector>

namespace meglab {

struct TransitionRecord {
    int h;
    int state;
    int action;
    double reward;
    int next_state;
};

// Append-only transition store for one task. Besides the raw records it keeps
// per-(h,s,a) aggregates (visit count, reward sum, next-state counts), which
// is what both oracles actually consume; the aggregates are order-independent
// so the oracle output never depends on insertion order.
class Dataset {
public:
    Dataset(int num_states, int num_actions, int horizon);

    void add_record(const TransitionRecord& rec);
    void add_episode(const Episode& episode);

    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    int horizon() const { return horizon_; }
    std::size_t num_records() const { return records_.size(); }
    std::size_t num_episodes() const { return num_episodes_; }
    const std::vector<TransitionRecord>& records() const { return records_; }
    // Episode index per record; -1 for records added outside add_episode.
    const std::vector<std::int32_t>& record_episode() const { return record_episode_; }

    std::int64_t visit_count(int h, int s, int a) const { return count_[index(h, s, a)]; }
    double reward_sum(int h, int s, int a) const { return reward_sum_[index(h, s, a)]; }
    std::int64_t next_count(int h, int s, int a, int sn) const {
        return next_count_[index(h, s, a) * static_cast<std::size_t>(num_states_) + sn];
    }

private:
    std::size_t index(int h, int s, int a) const {
        return (static_cast<std::size_t>(h) * num_states_ + s) * num_actions_ + a;
    }

    int num_states_, num_actions_, horizon_;
    std::size_t num_episodes_ = 0;
    std::vector<TransitionRecord> records_;
    std::vector<std::int32_t> record_episode_;
    std::vector<std::int64_t> count_;
    std::vector<double> reward_sum_;
    std::vector<std::int64_t> next_count_;
};

struct FqiOptions {
    // Value assigned to unvisited (h,s,a) cells. 0 is the pessimistic default;
    // the optimistic ablation uses 1.
    double unvisited_default = 0.0;
};

// Exact minimizer of the empirical squared Bellman error over the tabular
// class, computed backward in h: each visited cell gets the mean of
// r + max_a' q[h+1][s'][a'] over its records.
QFunction fqi_tabular(const Dataset& data, const FqiOptions& options = {});

// phi[h][s][a] in R^d for the finite embedding.
using FeatureMap = std::vector<std::vector<std::vector<Vec>>>;

struct LinearQ {
    int dim = 0;
    std::vector<Vec> w; // one weight vector per step h in 0..H-1

    double value(const FeatureMap& phi, int h, int s, int a) const;
    double next_state_value(const FeatureMap& phi, int h_next, int s_next) const;
};

// Backward ridge regression onto Bellman targets with a numerically
// negligible regularizer; weights are radially projected onto the ball of
// radius 2*sqrt(d).
LinearQ fqi_linear(const Dataset& data, const FeatureMap& phi, double lambda = 1e-6);

// Materializes the induced tabular Q for comparisons against fqi_tabular.
QFunction linear_q_to_table(const LinearQ& lq, const FeatureMap& phi);

} // namespace meglab
