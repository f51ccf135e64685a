#include "meglab/meg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace meglab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

void TaskSet::validate() const {
    if (tasks.empty()) throw std::invalid_argument("TaskSet: empty");
    if (!ids.empty() && ids.size() != tasks.size())
        throw std::invalid_argument("TaskSet: ids/tasks size mismatch");
    const auto& first = tasks.front();
    for (const auto& t : tasks) {
        if (t.num_states != first.num_states || t.num_actions != first.num_actions ||
            t.horizon != first.horizon)
            throw std::invalid_argument("TaskSet: tasks disagree on (S, A, H)");
        if (shared_transitions && t.transitions != first.transitions)
            throw std::invalid_argument("TaskSet: flagged shared-transitions but kernels differ");
    }
}

std::vector<double> suboptimality_levels(const std::vector<QFunction>& fs, const TaskSet& tasks) {
    tasks.validate();
    if (fs.size() != tasks.tasks.size())
        throw std::invalid_argument("suboptimality_levels: joint size mismatch");
    std::vector<double> out(fs.size(), 0.0);
    for (std::size_t j = 0; j < fs.size(); ++j) {
        const auto& task = tasks.tasks[j];
        require_q_shape(task, fs[j]);
        const auto opt = optimal_values(task);
        const auto eval = evaluate_policy(task, greedy_policy(fs[j]));
        out[j] = opt.v[0][task.initial_state] - eval.return_value;
    }
    return out;
}

SuboptimalJoint make_suboptimal_joint(std::vector<QFunction> fs, const TaskSet& tasks) {
    const auto levels = suboptimality_levels(fs, tasks);
    const double beta = *std::max_element(levels.begin(), levels.end());
    if (beta <= 0.0)
        throw std::invalid_argument("make_suboptimal_joint: every greedy policy is optimal");
    return SuboptimalJoint{std::move(fs), beta};
}

double concentrability_ratio(const OccupancyTensor& target, const OccupancyTensor& behavior) {
    double c = 1.0;
    for (std::size_t h = 0; h < target.mu.size(); ++h)
        for (std::size_t s = 0; s < target.mu[h].size(); ++s)
            for (std::size_t a = 0; a < target.mu[h][s].size(); ++a) {
                const double t = target.mu[h][s][a];
                if (t == 0.0) continue; // 0/0 imposes nothing
                const double b = behavior.mu[h][s][a];
                if (b == 0.0) return kInf;
                c = std::max(c, t / b);
            }
    return c;
}

double concentrability(const TabularMDP& mdp, const MarkovPolicy& behavior,
                       const MarkovPolicy& target) {
    return concentrability_ratio(occupancy(mdp, target), occupancy(mdp, behavior));
}

MegBehavior meg_behavior(const SuboptimalJoint& joint, const TaskSet& tasks,
                         const ExplorationSchedule& sched) {
    tasks.validate();
    if (joint.fs.size() != tasks.tasks.size())
        throw std::invalid_argument("meg_behavior: joint size mismatch");
    const int n = tasks.size();
    MegBehavior out;
    out.greedy.reserve(n);
    std::vector<MarkovPolicy> explored;
    explored.reserve(n);
    for (int j = 0; j < n; ++j) {
        require_q_shape(tasks.tasks[j], joint.fs[j]);
        out.greedy.push_back(greedy_policy(joint.fs[j]));
        explored.push_back(eps_greedy(out.greedy.back(), sched));
    }
    const MixturePolicy mix = mixture(explored);
    out.behavior_mu.reserve(n);
    out.greedy_value.reserve(n);
    out.c_fixed.reserve(n);
    for (int j = 0; j < n; ++j) {
        out.behavior_mu.push_back(occupancy(tasks.tasks[j], mix));
        out.greedy_value.push_back(evaluate_policy(tasks.tasks[j], out.greedy[j]).return_value);
        out.c_fixed.push_back(
            concentrability_ratio(occupancy(tasks.tasks[j], out.greedy[j]), out.behavior_mu[j]));
    }
    return out;
}

std::optional<double> meg_candidate(const TabularMDP& task, const MegBehavior& behavior,
                                    int task_index, const MarkovPolicy& pi_tilde) {
    const OccupancyTensor mu = occupancy(task, pi_tilde);
    const double c_tilde = concentrability_ratio(mu, behavior.behavior_mu[task_index]);
    const double c = std::max(c_tilde, behavior.c_fixed[task_index]);
    if (std::isinf(c)) return std::nullopt;
    const double value = evaluate_policy(task, pi_tilde).return_value;
    return (value - behavior.greedy_value[task_index]) / std::sqrt(c);
}

namespace {

// Forward pass for a deterministic candidate: returns its value, the
// constraint-minimal concentrability against the behavior, and feasibility.
struct CandidateStats {
    double value = 0.0;
    double c_tilde = 1.0;
    bool feasible = true;
};

CandidateStats scan_deterministic_candidate(const TabularMDP& task,
                                            const std::vector<int>& actions, // [h*S + s]
                                            const OccupancyTensor& behavior_mu) {
    const int S = task.num_states, H = task.horizon;
    CandidateStats stats;
    std::vector<double> dist(S, 0.0), next(S, 0.0);
    dist[task.initial_state] = 1.0;
    for (int h = 0; h < H; ++h) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int s = 0; s < S; ++s) {
            const double mass = dist[s];
            if (mass == 0.0) continue;
            const int a = actions[h * S + s];
            stats.value += mass * task.rewards[h][s][a];
            const double b = behavior_mu.mu[h][s][a];
            if (b == 0.0) {
                stats.feasible = false;
                return stats;
            }
            stats.c_tilde = std::max(stats.c_tilde, mass / b);
            if (h + 1 < H) {
                const auto& row = task.transitions[h][s][a];
                for (int sn = 0; sn < S; ++sn) next[sn] += mass * row[sn];
            }
        }
        if (h + 1 < H) dist.swap(next);
    }
    return stats;
}

} // namespace

MEGResult meg_exact(const SuboptimalJoint& joint, const TaskSet& tasks,
                    const ExplorationSchedule& sched, std::uint64_t cap) {
    tasks.validate();
    const TabularMDP& shape = tasks.tasks.front();
    const int S = shape.num_states, A = shape.num_actions, H = shape.horizon;

    const double log2_candidates = static_cast<double>(S) * H * std::log2(static_cast<double>(A));
    if (log2_candidates > std::log2(static_cast<double>(cap)) + 1e-9) {
        std::ostringstream os;
        os << "meg_exact: enumeration of A^(S*H) = " << A << "^" << (S * H)
           << " deterministic policies exceeds the cap " << cap << "; refusing";
        throw EnumerationCapError(os.str());
    }
    std::uint64_t total = 1;
    for (int i = 0; i < S * H; ++i) total *= static_cast<std::uint64_t>(A);

    const MegBehavior behavior = meg_behavior(joint, tasks, sched);

    MEGResult best;
    best.alpha = -kInf;
    best.feasible = false;

    std::vector<int> actions(static_cast<std::size_t>(S) * H, 0);
    for (int j = 0; j < tasks.size(); ++j) {
        const TabularMDP& task = tasks.tasks[j];
        const bool task_fixed_feasible = !std::isinf(behavior.c_fixed[j]);
        if (!task_fixed_feasible) continue;
        for (std::uint64_t idx = 0; idx < total; ++idx) {
            std::uint64_t code = idx;
            for (int cell = 0; cell < S * H; ++cell) {
                actions[cell] = static_cast<int>(code % A);
                code /= A;
            }
            const CandidateStats stats =
                scan_deterministic_candidate(task, actions, behavior.behavior_mu[j]);
            if (!stats.feasible) continue;
            const double c = std::max({1.0, stats.c_tilde, behavior.c_fixed[j]});
            const double cand = (stats.value - behavior.greedy_value[j]) / std::sqrt(c);
            if (!best.feasible || cand > best.alpha) {
                best.feasible = true;
                best.alpha = cand;
                best.c = c;
                best.task_index = j;
                std::vector<std::vector<int>> act(H, std::vector<int>(S));
                for (int h = 0; h < H; ++h)
                    for (int s = 0; s < S; ++s) act[h][s] = actions[h * S + s];
                best.improved_policy = MarkovPolicy::deterministic(act, A);
            }
        }
    }
    if (!best.feasible) {
        best.alpha = 0.0;
        best.c = kInf;
        best.task_index = -1;
    }
    return best;
}

std::optional<SparseGoal> detect_sparse_goal(const TabularMDP& mdp) {
    std::optional<SparseGoal> goal;
    for (int h = 0; h < mdp.horizon; ++h)
        for (int s = 0; s < mdp.num_states; ++s)
            for (int a = 0; a < mdp.num_actions; ++a) {
                const double r = mdp.rewards[h][s][a];
                if (r == 0.0) continue;
                if (r != 1.0 || goal.has_value()) return std::nullopt;
                goal = SparseGoal{s, a, h};
            }
    return goal;
}

double meg_upper_sparse(const TabularMDP& mdp, const SparseGoal& goal, const QFunction& f,
                        const ExplorationSchedule& sched) {
    const auto detected = detect_sparse_goal(mdp);
    if (!detected || detected->state != goal.state || detected->action != goal.action ||
        detected->h != goal.h)
        throw std::invalid_argument(
            "meg_upper_sparse: reward structure is not single-goal sparse at the stated goal");
    require_q_shape(mdp, f);
    const MarkovPolicy expl = eps_greedy(greedy_policy(f), sched);
    const OccupancyTensor mu = occupancy(mdp, expl);
    return std::sqrt(mu.mu[goal.h][goal.state][goal.action]);
}

Prop1Result check_prop1(const SuboptimalJoint& joint, const TaskSet& tasks,
                        const ExplorationSchedule& sched, std::uint64_t cap) {
    Prop1Result out;
    out.multitask = meg_exact(joint, tasks, sched, cap);
    out.singles.reserve(tasks.tasks.size());
    for (std::size_t j = 0; j < tasks.tasks.size(); ++j) {
        TaskSet single;
        single.tasks = {tasks.tasks[j]};
        single.shared_transitions = false;
        SuboptimalJoint restricted;
        restricted.fs = {joint.fs[j]};
        restricted.beta = joint.beta;
        out.singles.push_back(meg_exact(restricted, single, sched, cap));
    }
    return out;
}

HallwayInstance gen_hallway(int n) {
    if (n < 1) throw std::invalid_argument("gen_hallway: n must be >= 1");
    const int S = n + 1, A = 2, H = n;
    TabularMDP base = TabularMDP::zeros(S, A, H, 0);
    for (int h = 0; h < H; ++h)
        for (int s = 0; s < S; ++s) {
            base.transitions[h][s][0][std::max(0, s - 1)] = 1.0;
            base.transitions[h][s][1][std::min(S - 1, s + 1)] = 1.0;
        }
    HallwayInstance out;
    out.base = base;
    out.diverse.shared_transitions = true;
    for (int goal = 1; goal <= n; ++goal) {
        TabularMDP task = base;
        task.rewards[goal - 1][goal - 1][1] = 1.0;
        out.diverse.tasks.push_back(std::move(task));
        out.diverse.ids.push_back("hallway_goal_" + std::to_string(goal));
    }
    return out;
}

TaskSet gen_sparse_set(const TabularMDP& base) {
    require_valid_mdp(base);
    TaskSet out;
    out.shared_transitions = true;
    for (int h = 0; h < base.horizon; ++h)
        for (int s = 0; s < base.num_states; ++s) {
            TabularMDP task = base;
            for (auto& layer : task.rewards)
                for (auto& row : layer)
                    for (auto& v : row) v = 0.0;
            for (int a = 0; a < base.num_actions; ++a) task.rewards[h][s][a] = 1.0;
            out.tasks.push_back(std::move(task));
            out.ids.push_back("sparse_s" + std::to_string(s) + "_h" + std::to_string(h));
        }
    return out;
}

std::optional<std::pair<int, int>> detect_sparse_state_goal(const TabularMDP& task) {
    std::optional<std::pair<int, int>> goal;
    for (int h = 0; h < task.horizon; ++h)
        for (int s = 0; s < task.num_states; ++s) {
            bool all_one = true, all_zero = true;
            for (int a = 0; a < task.num_actions; ++a) {
                if (task.rewards[h][s][a] != 1.0) all_one = false;
                if (task.rewards[h][s][a] != 0.0) all_zero = false;
            }
            if (all_zero) continue;
            if (!all_one || goal.has_value()) return std::nullopt;
            goal = std::make_pair(s, h);
        }
    return goal;
}

double max_reach_probability(const TabularMDP& mdp, int target_state, int target_h) {
    if (target_h < 0 || target_h >= mdp.horizon)
        throw std::invalid_argument("max_reach_probability: step out of range");
    if (target_state < 0 || target_state >= mdp.num_states)
        throw std::invalid_argument("max_reach_probability: state out of range");
    std::vector<double> val(mdp.num_states, 0.0);
    val[target_state] = 1.0;
    for (int h = target_h - 1; h >= 0; --h) {
        std::vector<double> cur(mdp.num_states, 0.0);
        for (int s = 0; s < mdp.num_states; ++s) {
            double best = 0.0;
            for (int a = 0; a < mdp.num_actions; ++a) {
                double acc = 0.0;
                for (int sn = 0; sn < mdp.num_states; ++sn)
                    acc += mdp.transitions[h][s][a][sn] * val[sn];
                best = std::max(best, acc);
            }
            cur[s] = best;
        }
        val = std::move(cur);
    }
    return val[mdp.initial_state];
}

CoverageResult coverage_constant(const TabularMDP& base) {
    require_valid_mdp(base);
    CoverageResult out;
    double b1 = kInf;
    bool beyond_start = false;
    for (int h = 0; h < base.horizon; ++h)
        for (int s = 0; s < base.num_states; ++s) {
            const double reach = max_reach_probability(base, s, h);
            if (reach == 0.0) {
                out.unreachable.emplace_back(s, h);
                continue;
            }
            if (!(h == 0 && s == base.initial_state)) beyond_start = true;
            b1 = std::min(b1, reach);
        }
    out.b1 = beyond_start ? b1 : kInf;
    return out;
}

TabularMDP mirror_transform(const TabularMDP& base, double beta) {
    require_valid_mdp(base);
    if (beta <= 0.0) throw std::invalid_argument("mirror_transform: beta must be positive");
    const int S = base.num_states, A = base.num_actions, H = base.horizon;
    const int dummy = S; // appended so original state indices stay put
    TabularMDP m = TabularMDP::zeros(S + 1, A, H, base.initial_state);
    for (int h = 0; h < H; ++h)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                for (int sn = 0; sn < S; ++sn)
                    m.transitions[h][s][a][sn] = base.transitions[h][s][a][sn];
                m.rewards[h][s][a] = base.rewards[h][s][a];
            }
    for (int h = 0; h < H; ++h)
        for (int a = 0; a < A; ++a) m.transitions[h][dummy][a][dummy] = 1.0;

    // Forward sweep: layer h redirections rewrite the kernel into step h+1.
    for (int h = 0; h + 1 < H; ++h) {
        for (int s = 0; s < S; ++s) {
            const double reach = max_reach_probability(m, s, h + 1);
            if (reach > beta) continue;
            for (int st = 0; st < S + 1; ++st)
                for (int a = 0; a < A; ++a) {
                    m.transitions[h][st][a][dummy] += m.transitions[h][st][a][s];
                    m.transitions[h][st][a][s] = 0.0;
                }
        }
    }
    return m;
}

} // namespace meglab
