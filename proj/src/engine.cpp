#include "meglab/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace meglab {

namespace {

std::vector<std::uint8_t> pack_actions(const MarkovPolicy& pi, int S, int H) {
    std::vector<std::uint8_t> packed(static_cast<std::size_t>(H) * S);
    for (int h = 0; h < H; ++h)
        for (int s = 0; s < S; ++s) {
            const auto& row = pi.probs[h][s];
            int a = 0;
            for (std::size_t i = 0; i < row.size(); ++i)
                if (row[i] == 1.0) a = static_cast<int>(i);
            packed[static_cast<std::size_t>(h) * S + s] = static_cast<std::uint8_t>(a);
        }
    return packed;
}

MarkovPolicy unpack_actions(const std::vector<std::uint8_t>& packed, int S, int A, int H) {
    std::vector<std::vector<int>> actions(H, std::vector<int>(S));
    for (int h = 0; h < H; ++h)
        for (int s = 0; s < S; ++s) actions[h][s] = packed[static_cast<std::size_t>(h) * S + s];
    return MarkovPolicy::deterministic(actions, A);
}

} // namespace

RunLog run_algorithm1(const TaskSet& tasks, const ExplorationSchedule& sched, int rounds,
                      std::uint64_t seed, const RunOptions& options) {
    tasks.validate();
    sched.validate();
    if (rounds < 1) throw std::invalid_argument("run_algorithm1: rounds must be >= 1");
    if (options.eval_every < 1)
        throw std::invalid_argument("run_algorithm1: eval_every must be >= 1");
    const TabularMDP& shape = tasks.tasks.front();
    const int S = shape.num_states, A = shape.num_actions, H = shape.horizon;
    if (sched.horizon() != H)
        throw std::invalid_argument("run_algorithm1: schedule horizon mismatch");
    const int n = tasks.size();

    RunLog log;
    log.seed = seed;
    log.num_tasks = n;
    log.config_echo = options.config_echo;
    log.optimal_values.reserve(n);
    for (const auto& task : tasks.tasks)
        log.optimal_values.push_back(optimal_values(task).v[0][task.initial_state]);

    std::vector<Dataset> data(n, Dataset(S, A, H));

    for (int round = 1; round <= rounds; ++round) {
        // Offline learning per task, then share policies through the mixture.
        std::vector<MarkovPolicy> greedy;
        std::vector<MarkovPolicy> explored;
        greedy.reserve(n);
        explored.reserve(n);
        for (int j = 0; j < n; ++j) {
            greedy.push_back(greedy_policy(fqi_tabular(data[j])));
            explored.push_back(eps_greedy(greedy.back(), sched));
        }
        const MixturePolicy shared = mixture(explored);

        log.greedy_actions.emplace_back();
        auto& round_actions = log.greedy_actions.back();
        round_actions.reserve(n);
        for (int j = 0; j < n; ++j) round_actions.push_back(pack_actions(greedy[j], S, H));

        const bool eval_round = (round % options.eval_every == 0) || round == rounds;
        bool all_beta_optimal = true;
        if (eval_round) {
            for (int j = 0; j < n; ++j) {
                const double value = evaluate_policy(tasks.tasks[j], greedy[j]).return_value;
                log.rows.push_back({round, j, value, log.optimal_values[j],
                                    static_cast<std::int64_t>(round) * n});
                if (options.stop_when_beta_optimal &&
                    log.optimal_values[j] - value > *options.stop_when_beta_optimal)
                    all_beta_optimal = false;
            }
        }

        log.rounds = round;
        if (eval_round && options.stop_when_beta_optimal && all_beta_optimal) break;

        // Collect one episode per task with the shared mixture.
        for (int j = 0; j < n; ++j) {
            rng::Stream stream(rng::derive(seed, {static_cast<std::uint64_t>(round),
                                                  static_cast<std::uint64_t>(j)}));
            data[j].add_episode(sample_episode(tasks.tasks[j], shared, stream));
        }
    }
    if (options.keep_datasets) log.datasets = std::move(data);
    return log;
}

std::optional<int> sample_complexity(const RunLog& log, double beta) {
    if (log.num_tasks == 0) return std::nullopt;
    int current_round = -1;
    int tasks_ok = 0;
    for (const auto& row : log.rows) {
        if (row.round != current_round) {
            current_round = row.round;
            tasks_ok = 0;
        }
        if (row.optimal_value - row.greedy_value <= beta) {
            if (++tasks_ok == log.num_tasks) return current_round;
        }
    }
    return std::nullopt;
}

std::vector<MixturePolicy> returned_policy(const RunLog& log, const TaskSet& tasks,
                                           ReturnMode mode) {
    tasks.validate();
    const TabularMDP& shape = tasks.tasks.front();
    const int S = shape.num_states, A = shape.num_actions, H = shape.horizon;
    std::vector<MixturePolicy> out(log.num_tasks);
    for (int j = 0; j < log.num_tasks; ++j) {
        if (mode == ReturnMode::FinalGreedy) {
            out[j].members.push_back(unpack_actions(log.greedy_actions.back()[j], S, A, H));
        } else {
            for (const auto& round_actions : log.greedy_actions)
                out[j].members.push_back(unpack_actions(round_actions[j], S, A, H));
        }
    }
    return out;
}

std::vector<double> returned_policy_values(const RunLog& log, const TaskSet& tasks,
                                           ReturnMode mode) {
    const auto policies = returned_policy(log, tasks, mode);
    std::vector<double> values(policies.size(), 0.0);
    for (std::size_t j = 0; j < policies.size(); ++j) {
        // Episode-level mixture value is the mean of member values.
        double acc = 0.0;
        for (const auto& member : policies[j].members)
            acc += evaluate_policy(tasks.tasks[j], member).return_value;
        values[j] = acc / static_cast<double>(policies[j].members.size());
    }
    return values;
}

CurriculumResult run_curriculum(const TaskSet& ordered_tasks, double delta, std::uint64_t seed) {
    ordered_tasks.validate();
    if (delta <= 0.0 || delta >= 1.0)
        throw std::invalid_argument("run_curriculum: delta must be in (0,1)");
    const TabularMDP& shape = ordered_tasks.tasks.front();
    const int S = shape.num_states, A = shape.num_actions, H = shape.horizon;
    for (const auto& task : ordered_tasks.tasks)
        for (const auto& layer : task.transitions)
            for (const auto& row : layer)
                for (const auto& dist : row)
                    for (double p : dist)
                        if (p != 0.0 && p != 1.0)
                            throw std::invalid_argument(
                                "run_curriculum: tasks must have deterministic transitions");

    CurriculumResult out;
    MarkovPolicy current = greedy_policy(QFunction::zeros(S, A, H));
    const double log_term = std::log(static_cast<double>(H) / delta);
    for (int phase = 1; phase <= ordered_tasks.size(); ++phase) {
        const TabularMDP& task = ordered_tasks.tasks[phase - 1];
        const auto budget = static_cast<std::int64_t>(
            std::ceil(4.0 * A * phase * log_term));
        const MarkovPolicy behavior =
            eps_greedy(current, constant_schedule(H, 1.0 / static_cast<double>(phase)));
        Dataset phase_data(S, A, H);
        for (std::int64_t e = 0; e < budget; ++e) {
            rng::Stream stream(rng::derive(seed, {static_cast<std::uint64_t>(phase),
                                                  static_cast<std::uint64_t>(e)}));
            phase_data.add_episode(sample_episode(task, behavior, stream));
        }
        current = greedy_policy(fqi_tabular(phase_data));
        out.episodes_used += budget;
        out.phase_episodes.push_back(budget);
    }
    const TabularMDP& last = ordered_tasks.tasks.back();
    const double optimal = optimal_values(last).v[0][last.initial_state];
    const double achieved = evaluate_policy(last, current).return_value;
    out.success = achieved >= optimal - 1e-9;
    out.policy = std::move(current);
    return out;
}

} // namespace meglab
