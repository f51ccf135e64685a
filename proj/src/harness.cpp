#include "meglab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <thread>

namespace meglab::harness {

TabularMDP random_dense_mdp(int num_states, int num_actions, int horizon, rng::Stream& stream) {
    TabularMDP m = TabularMDP::zeros(num_states, num_actions, horizon, 0);
    for (int h = 0; h < horizon; ++h)
        for (int s = 0; s < num_states; ++s)
            for (int a = 0; a < num_actions; ++a) {
                double total = 0.0;
                for (int sn = 0; sn < num_states; ++sn) {
                    const double w = 0.1 + stream.next_double();
                    m.transitions[h][s][a][sn] = w;
                    total += w;
                }
                for (int sn = 0; sn < num_states; ++sn) m.transitions[h][s][a][sn] /= total;
                m.rewards[h][s][a] = stream.next_double();
            }
    const double best = max_cumulative_reward(m);
    if (best > 1.0)
        for (auto& layer : m.rewards)
            for (auto& row : layer)
                for (auto& v : row) v /= best;
    return m;
}

TabularMDP random_patchy_mdp(int num_states, int num_actions, int horizon, rng::Stream& stream) {
    TabularMDP m = TabularMDP::zeros(num_states, num_actions, horizon, 0);
    for (int h = 0; h < horizon; ++h)
        for (int s = 0; s < num_states; ++s)
            for (int a = 0; a < num_actions; ++a) {
                if (stream.next_double() < 0.5) {
                    m.transitions[h][s][a][stream.next_int(num_states)] = 1.0;
                } else {
                    double total = 0.0;
                    for (int sn = 0; sn < num_states; ++sn) {
                        const double w = stream.next_double();
                        m.transitions[h][s][a][sn] = w;
                        total += w;
                    }
                    for (int sn = 0; sn < num_states; ++sn) m.transitions[h][s][a][sn] /= total;
                }
                m.rewards[h][s][a] = stream.next_double();
            }
    const double best = max_cumulative_reward(m);
    if (best > 1.0)
        for (auto& layer : m.rewards)
            for (auto& row : layer)
                for (auto& v : row) v /= best;
    return m;
}

MarkovPolicy random_stochastic_policy(int num_states, int num_actions, int horizon,
                                      rng::Stream& stream) {
    MarkovPolicy pi = MarkovPolicy::uniform(num_states, num_actions, horizon);
    for (auto& layer : pi.probs)
        for (auto& row : layer) {
            double total = 0.0;
            for (auto& p : row) {
                p = 0.05 + stream.next_double();
                total += p;
            }
            for (auto& p : row) p /= total;
        }
    return pi;
}

QFunction random_q(int num_states, int num_actions, int horizon, rng::Stream& stream) {
    QFunction f = QFunction::zeros(num_states, num_actions, horizon);
    for (int h = 0; h < horizon; ++h)
        for (int s = 0; s < num_states; ++s)
            for (int a = 0; a < num_actions; ++a) f.q[h][s][a] = stream.next_double();
    return f;
}

SuboptimalJoint random_suboptimal_joint(const TaskSet& tasks, rng::Stream& stream) {
    const TabularMDP& shape = tasks.tasks.front();
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<QFunction> fs;
        fs.reserve(tasks.tasks.size());
        for (std::size_t j = 0; j < tasks.tasks.size(); ++j)
            fs.push_back(random_q(shape.num_states, shape.num_actions, shape.horizon, stream));
        const auto levels = suboptimality_levels(fs, tasks);
        if (*std::max_element(levels.begin(), levels.end()) > 1e-6)
            return SuboptimalJoint{std::move(fs),
                                   *std::max_element(levels.begin(), levels.end())};
    }
    throw std::runtime_error("random_suboptimal_joint: no suboptimal joint found");
}

LQRSystem random_wellposed_lqr(int dim_state, int dim_action, int horizon, rng::Stream& stream) {
    LQRSystem sys;
    sys.dim_state = dim_state;
    sys.dim_action = dim_action;
    sys.horizon = horizon;
    const double a_scale = 1.0 / std::sqrt(static_cast<double>(dim_state));
    for (int h = 0; h < horizon; ++h) {
        Mat a(dim_state, dim_state), b(dim_state, dim_action);
        for (auto& v : a.a) v = a_scale * stream.next_gaussian();
        for (auto& v : b.a) v = a_scale * stream.next_gaussian();
        Mat c(dim_state, dim_state);
        for (auto& v : c.a) v = 0.5 * stream.next_gaussian();
        // Rs = -C C^T is negative semidefinite, which keeps every K_h
        // dominated by Ra and the recursion well-posed.
        Mat rs = -1.0 * (c * transpose(c));
        Mat ra = -1.0 * Mat::identity(dim_action);
        for (int i = 0; i < dim_action; ++i) ra(i, i) -= stream.next_double();
        sys.A.push_back(std::move(a));
        sys.B.push_back(std::move(b));
        sys.Rs.push_back(symmetrize(rs));
        sys.Ra.push_back(std::move(ra));
    }
    sys.initial_state.assign(dim_state, 0.0);
    for (auto& v : sys.initial_state) v = stream.next_gaussian();
    return sys;
}

MtrlRunSummary summarize_complexities(const std::vector<std::optional<int>>& per_seed) {
    MtrlRunSummary summary;
    summary.per_seed_complexity = per_seed;
    int successes = 0;
    std::vector<double> values;
    for (const auto& c : per_seed) {
        if (c) {
            ++successes;
            values.push_back(static_cast<double>(*c));
        } else {
            values.push_back(std::numeric_limits<double>::infinity());
        }
    }
    summary.success_fraction =
        per_seed.empty() ? 0.0 : static_cast<double>(successes) / per_seed.size();
    if (!values.empty()) {
        std::sort(values.begin(), values.end());
        const std::size_t n = values.size();
        const double median = (n % 2 == 1) ? values[n / 2]
                                           : 0.5 * (values[n / 2 - 1] + values[n / 2]);
        if (std::isfinite(median)) summary.median_complexity = median;
    }
    return summary;
}

namespace {

void parallel_for(int count, int workers, const std::function<void(int)>& body) {
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    const int threads = std::min(workers, count);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&]() {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                body(i);
            }
        });
    for (auto& th : pool) th.join();
}

} // namespace

MtrlRunSummary run_mtrl(const TaskSet& tasks, const ExplorationSchedule& sched, int rounds,
                        double beta, const std::vector<std::uint64_t>& seeds,
                        const std::filesystem::path& out_dir, int workers,
                        const std::string& config_echo, bool early_stop, int eval_every,
                        bool export_datasets) {
    std::vector<std::optional<int>> per_seed(seeds.size());
    std::vector<std::string> csvs(seeds.size());
    std::vector<std::vector<std::string>> dataset_csvs(seeds.size());
    parallel_for(static_cast<int>(seeds.size()), workers, [&](int i) {
        RunOptions options;
        options.eval_every = eval_every;
        options.config_echo = config_echo;
        options.keep_datasets = export_datasets;
        if (early_stop) options.stop_when_beta_optimal = beta;
        const RunLog log = run_algorithm1(tasks, sched, rounds, seeds[i], options);
        per_seed[i] = sample_complexity(log, beta);
        csvs[i] = io::runlog_csv(log);
        if (export_datasets)
            for (int j = 0; j < tasks.size(); ++j) {
                const std::string id =
                    tasks.ids.empty() ? "task" + std::to_string(j) : tasks.ids[j];
                dataset_csvs[i].push_back(io::dataset_csv(log.datasets[j], id));
            }
    });
    const MtrlRunSummary summary = summarize_complexities(per_seed);
    if (!out_dir.empty()) {
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            io::atomic_write(out_dir / ("runlog_seed" + std::to_string(i) + ".csv"), csvs[i]);
            for (std::size_t j = 0; j < dataset_csvs[i].size(); ++j)
                io::atomic_write(out_dir / ("dataset_seed" + std::to_string(i) + "_task" +
                                            std::to_string(j) + ".csv"),
                                 dataset_csvs[i][j]);
        }
        io::json j;
        j["beta"] = beta;
        j["rounds_budget"] = rounds;
        j["num_tasks"] = tasks.size();
        j["seeds"] = seeds;
        io::json per = io::json::array();
        for (const auto& c : summary.per_seed_complexity)
            per.push_back(c ? io::json(*c) : io::json(nullptr));
        j["per_seed_complexity"] = per;
        j["success_fraction"] = summary.success_fraction;
        j["median_complexity"] =
            summary.median_complexity ? io::json(*summary.median_complexity) : io::json(nullptr);
        io::atomic_write(out_dir / "summary.json", j.dump(2) + "\n");
    }
    return summary;
}

CurriculumSummary run_curriculum_sweep(const TaskSet& ordered_tasks, double delta,
                                       const std::vector<std::uint64_t>& seeds,
                                       const std::filesystem::path& out_dir, int workers) {
    CurriculumSummary summary;
    summary.per_seed_success.assign(seeds.size(), false);
    summary.per_seed_episodes.assign(seeds.size(), 0);
    std::vector<char> success(seeds.size(), 0);
    parallel_for(static_cast<int>(seeds.size()), workers, [&](int i) {
        const CurriculumResult result = run_curriculum(ordered_tasks, delta, seeds[i]);
        success[i] = result.success ? 1 : 0;
        summary.per_seed_episodes[i] = result.episodes_used;
    });
    int wins = 0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        summary.per_seed_success[i] = success[i] != 0;
        if (success[i]) ++wins;
    }
    summary.success_fraction =
        seeds.empty() ? 0.0 : static_cast<double>(wins) / seeds.size();
    if (!out_dir.empty()) {
        std::string csv = "seed,episodes_total,success\n";
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            csv += std::to_string(seeds[i]);
            csv += ',';
            csv += std::to_string(summary.per_seed_episodes[i]);
            csv += ',';
            csv += summary.per_seed_success[i] ? "1" : "0";
            csv += '\n';
        }
        io::atomic_write(out_dir / "curriculum.csv", csv);
        io::json j;
        j["delta"] = delta;
        j["seeds"] = seeds;
        j["success_fraction"] = summary.success_fraction;
        io::atomic_write(out_dir / "summary.json", j.dump(2) + "\n");
    }
    return summary;
}

bool AuditReport::all_pass() const {
    for (const auto& line : checks)
        if (!line.pass) return false;
    return true;
}

std::string AuditReport::to_text() const {
    std::string out;
    for (const auto& line : checks) {
        out += line.pass ? "PASS " : "FAIL ";
        out += kind;
        out += '/';
        out += line.name;
        if (!line.detail.empty()) {
            out += ": ";
            out += line.detail;
        }
        out += '\n';
    }
    return out;
}

io::json AuditReport::to_json() const {
    io::json j;
    j["kind"] = kind;
    j["all_pass"] = all_pass();
    io::json arr = io::json::array();
    for (const auto& line : checks) {
        io::json c;
        c["name"] = line.name;
        c["pass"] = line.pass;
        c["detail"] = line.detail;
        arr.push_back(c);
    }
    j["checks"] = arr;
    return j;
}

int env_worker_count() {
    const char* env = std::getenv("MEGLAB_WORKERS");
    if (env == nullptr) return 1;
    const int parsed = std::atoi(env);
    return parsed >= 1 ? parsed : 1;
}

} // namespace meglab::harness
