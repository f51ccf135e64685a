#include "meglab/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace meglab {

namespace {

constexpr double kRowSumTol = 1e-12;
constexpr double kMaxRewardTol = 1e-9;

std::string at(int h, int s, int a) {
    std::ostringstream os;
    os << "(h=" << h << ", s=" << s << ", a=" << a << ")";
    return os.str();
}

} // namespace

TabularMDP TabularMDP::zeros(int num_states, int num_actions, int horizon, int initial_state) {
    TabularMDP m;
    m.num_states = num_states;
    m.num_actions = num_actions;
    m.horizon = horizon;
    m.initial_state = initial_state;
    m.transitions.assign(horizon, std::vector<std::vector<std::vector<double>>>(
                                      num_states, std::vector<std::vector<double>>(
                                                      num_actions, std::vector<double>(num_states, 0.0))));
    m.rewards.assign(horizon, std::vector<std::vector<double>>(
                                  num_states, std::vector<double>(num_actions, 0.0)));
    return m;
}

MarkovPolicy MarkovPolicy::uniform(int num_states, int num_actions, int horizon) {
    MarkovPolicy pi;
    pi.probs.assign(horizon, std::vector<std::vector<double>>(
                                 num_states, std::vector<double>(num_actions, 1.0 / num_actions)));
    return pi;
}

MarkovPolicy MarkovPolicy::deterministic(const std::vector<std::vector<int>>& actions, int num_actions) {
    MarkovPolicy pi;
    pi.probs.resize(actions.size());
    for (std::size_t h = 0; h < actions.size(); ++h) {
        pi.probs[h].resize(actions[h].size());
        for (std::size_t s = 0; s < actions[h].size(); ++s) {
            pi.probs[h][s].assign(num_actions, 0.0);
            pi.probs[h][s][actions[h][s]] = 1.0;
        }
    }
    return pi;
}

QFunction QFunction::zeros(int num_states, int num_actions, int horizon) {
    QFunction f;
    f.q.assign(horizon + 1, std::vector<std::vector<double>>(
                                num_states, std::vector<double>(num_actions, 0.0)));
    return f;
}

void require_valid_mdp(const TabularMDP& mdp) {
    if (mdp.num_states < 1) throw std::invalid_argument("TabularMDP: num_states must be positive");
    if (mdp.num_actions < 1) throw std::invalid_argument("TabularMDP: num_actions must be positive");
    if (mdp.horizon < 1) throw std::invalid_argument("TabularMDP: horizon must be positive");
    if (mdp.initial_state < 0 || mdp.initial_state >= mdp.num_states)
        throw std::invalid_argument("TabularMDP: initial_state out of range");

    if (static_cast<int>(mdp.transitions.size()) != mdp.horizon)
        throw std::invalid_argument("TabularMDP: transitions axis h has size " +
                                    std::to_string(mdp.transitions.size()) + ", expected H=" +
                                    std::to_string(mdp.horizon));
    if (static_cast<int>(mdp.rewards.size()) != mdp.horizon)
        throw std::invalid_argument("TabularMDP: rewards axis h has size " +
                                    std::to_string(mdp.rewards.size()) + ", expected H=" +
                                    std::to_string(mdp.horizon));
    for (int h = 0; h < mdp.horizon; ++h) {
        if (static_cast<int>(mdp.transitions[h].size()) != mdp.num_states)
            throw std::invalid_argument("TabularMDP: transitions axis s at h=" + std::to_string(h) +
                                        " has size " + std::to_string(mdp.transitions[h].size()) +
                                        ", expected S=" + std::to_string(mdp.num_states));
        if (static_cast<int>(mdp.rewards[h].size()) != mdp.num_states)
            throw std::invalid_argument("TabularMDP: rewards axis s at h=" + std::to_string(h) +
                                        " has size " + std::to_string(mdp.rewards[h].size()) +
                                        ", expected S=" + std::to_string(mdp.num_states));
        for (int s = 0; s < mdp.num_states; ++s) {
            if (static_cast<int>(mdp.transitions[h][s].size()) != mdp.num_actions)
                throw std::invalid_argument("TabularMDP: transitions axis a at (h=" + std::to_string(h) +
                                            ", s=" + std::to_string(s) + ") has size " +
                                            std::to_string(mdp.transitions[h][s].size()) +
                                            ", expected A=" + std::to_string(mdp.num_actions));
            if (static_cast<int>(mdp.rewards[h][s].size()) != mdp.num_actions)
                throw std::invalid_argument("TabularMDP: rewards axis a at (h=" + std::to_string(h) +
                                            ", s=" + std::to_string(s) + ") has size " +
                                            std::to_string(mdp.rewards[h][s].size()) +
                                            ", expected A=" + std::to_string(mdp.num_actions));
            for (int a = 0; a < mdp.num_actions; ++a) {
                if (static_cast<int>(mdp.transitions[h][s][a].size()) != mdp.num_states)
                    throw std::invalid_argument("TabularMDP: transitions axis s' at " + at(h, s, a) +
                                                " has size " + std::to_string(mdp.transitions[h][s][a].size()) +
                                                ", expected S=" + std::to_string(mdp.num_states));
            }
        }
    }
}

void require_policy_shape(const TabularMDP& mdp, const MarkovPolicy& pi) {
    if (static_cast<int>(pi.probs.size()) != mdp.horizon)
        throw std::invalid_argument("MarkovPolicy: horizon mismatch");
    for (int h = 0; h < mdp.horizon; ++h) {
        if (static_cast<int>(pi.probs[h].size()) != mdp.num_states)
            throw std::invalid_argument("MarkovPolicy: state axis mismatch at h=" + std::to_string(h));
        for (int s = 0; s < mdp.num_states; ++s)
            if (static_cast<int>(pi.probs[h][s].size()) != mdp.num_actions)
                throw std::invalid_argument("MarkovPolicy: action axis mismatch at (h=" +
                                            std::to_string(h) + ", s=" + std::to_string(s) + ")");
    }
}

void require_q_shape(const TabularMDP& mdp, const QFunction& f) {
    if (static_cast<int>(f.q.size()) != mdp.horizon + 1)
        throw std::invalid_argument("QFunction: expected H+1 layers");
    for (int h = 0; h <= mdp.horizon; ++h) {
        if (static_cast<int>(f.q[h].size()) != mdp.num_states)
            throw std::invalid_argument("QFunction: state axis mismatch at h=" + std::to_string(h));
        for (int s = 0; s < mdp.num_states; ++s)
            if (static_cast<int>(f.q[h][s].size()) != mdp.num_actions)
                throw std::invalid_argument("QFunction: action axis mismatch at (h=" +
                                            std::to_string(h) + ", s=" + std::to_string(s) + ")");
    }
}

double max_cumulative_reward(const TabularMDP& mdp) {
    // m[s] = best achievable reward-to-go from s over positive-probability paths.
    std::vector<double> next(mdp.num_states, 0.0);
    for (int h = mdp.horizon - 1; h >= 0; --h) {
        std::vector<double> cur(mdp.num_states, 0.0);
        for (int s = 0; s < mdp.num_states; ++s) {
            double best = 0.0;
            for (int a = 0; a < mdp.num_actions; ++a) {
                double reach_best = 0.0;
                bool any = false;
                for (int sn = 0; sn < mdp.num_states; ++sn) {
                    if (mdp.transitions[h][s][a][sn] > 0.0) {
                        reach_best = any ? std::max(reach_best, next[sn]) : next[sn];
                        any = true;
                    }
                }
                const double total = mdp.rewards[h][s][a] + (any ? reach_best : 0.0);
                if (a == 0 || total > best) best = total;
            }
            cur[s] = best;
        }
        next = std::move(cur);
    }
    return next[mdp.initial_state];
}

ValidationReport validate_mdp(const TabularMDP& mdp) {
    require_valid_mdp(mdp);
    ValidationReport report;
    for (int h = 0; h < mdp.horizon; ++h) {
        for (int s = 0; s < mdp.num_states; ++s) {
            for (int a = 0; a < mdp.num_actions; ++a) {
                double row_sum = 0.0;
                for (int sn = 0; sn < mdp.num_states; ++sn) {
                    const double p = mdp.transitions[h][s][a][sn];
                    if (p < 0.0) {
                        std::ostringstream os;
                        os << "negative transition probability " << p << " at " << at(h, s, a)
                           << " -> s'=" << sn;
                        report.errors.push_back(os.str());
                    }
                    row_sum += p;
                }
                if (std::abs(row_sum - 1.0) > kRowSumTol) {
                    std::ostringstream os;
                    os << "row sum " << row_sum << " at " << at(h, s, a);
                    report.errors.push_back(os.str());
                }
                const double r = mdp.rewards[h][s][a];
                if (r < 0.0 || r > 1.0) {
                    std::ostringstream os;
                    os << "reward " << r << " outside [0,1] at " << at(h, s, a);
                    report.errors.push_back(os.str());
                }
            }
        }
    }
    if (report.errors.empty()) {
        const double best = max_cumulative_reward(mdp);
        if (best > 1.0 + kMaxRewardTol) {
            std::ostringstream os;
            os << "max cumulative reward " << best << " exceeds 1";
            report.warnings.push_back(os.str());
        }
    }
    return report;
}

PolicyEvaluation evaluate_policy(const TabularMDP& mdp, const MarkovPolicy& pi) {
    require_valid_mdp(mdp);
    require_policy_shape(mdp, pi);
    const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
    PolicyEvaluation out;
    out.q = QFunction::zeros(S, A, H);
    out.v.assign(H + 1, std::vector<double>(S, 0.0));
    for (int h = H - 1; h >= 0; --h) {
        for (int s = 0; s < S; ++s) {
            double vs = 0.0;
            for (int a = 0; a < A; ++a) {
                double qa = mdp.rewards[h][s][a];
                for (int sn = 0; sn < S; ++sn) qa += mdp.transitions[h][s][a][sn] * out.v[h + 1][sn];
                out.q.q[h][s][a] = qa;
                vs += pi.probs[h][s][a] * qa;
            }
            out.v[h][s] = vs;
        }
    }
    out.return_value = out.v[0][mdp.initial_state];
    return out;
}

OptimalValues optimal_values(const TabularMDP& mdp) {
    require_valid_mdp(mdp);
    const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
    OptimalValues out;
    out.q = QFunction::zeros(S, A, H);
    out.v.assign(H + 1, std::vector<double>(S, 0.0));
    std::vector<std::vector<int>> actions(H, std::vector<int>(S, 0));
    for (int h = H - 1; h >= 0; --h) {
        for (int s = 0; s < S; ++s) {
            double best = 0.0;
            int best_a = 0;
            for (int a = 0; a < A; ++a) {
                double qa = mdp.rewards[h][s][a];
                for (int sn = 0; sn < S; ++sn) qa += mdp.transitions[h][s][a][sn] * out.v[h + 1][sn];
                out.q.q[h][s][a] = qa;
                if (a == 0 || qa > best) {
                    best = qa;
                    best_a = a;
                }
            }
            out.v[h][s] = best;
            actions[h][s] = best_a;
        }
    }
    out.greedy = MarkovPolicy::deterministic(actions, A);
    return out;
}

MarkovPolicy greedy_policy(const QFunction& f) {
    const int H = f.horizon();
    std::vector<std::vector<int>> actions(H);
    int A = 0;
    for (int h = 0; h < H; ++h) {
        const int S = static_cast<int>(f.q[h].size());
        actions[h].resize(S);
        for (int s = 0; s < S; ++s) {
            A = static_cast<int>(f.q[h][s].size());
            int best_a = 0;
            for (int a = 1; a < A; ++a)
                if (f.q[h][s][a] > f.q[h][s][best_a]) best_a = a;
            actions[h][s] = best_a;
        }
    }
    return MarkovPolicy::deterministic(actions, A);
}

OccupancyTensor occupancy(const TabularMDP& mdp, const MarkovPolicy& pi) {
    require_valid_mdp(mdp);
    require_policy_shape(mdp, pi);
    const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
    OccupancyTensor out;
    out.mu.assign(H, std::vector<std::vector<double>>(S, std::vector<double>(A, 0.0)));
    std::vector<double> state_dist(S, 0.0);
    state_dist[mdp.initial_state] = 1.0;
    for (int h = 0; h < H; ++h) {
        for (int s = 0; s < S; ++s) {
            if (state_dist[s] == 0.0) continue;
            for (int a = 0; a < A; ++a) out.mu[h][s][a] = state_dist[s] * pi.probs[h][s][a];
        }
        if (h + 1 < H) {
            std::vector<double> next_dist(S, 0.0);
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a) {
                    const double mass = out.mu[h][s][a];
                    if (mass == 0.0) continue;
                    for (int sn = 0; sn < S; ++sn) next_dist[sn] += mass * mdp.transitions[h][s][a][sn];
                }
            state_dist = std::move(next_dist);
        }
    }
    return out;
}

OccupancyTensor occupancy(const TabularMDP& mdp, const MixturePolicy& pi) {
    if (pi.members.empty()) throw std::invalid_argument("occupancy: empty mixture");
    OccupancyTensor acc = occupancy(mdp, pi.members[0]);
    for (std::size_t i = 1; i < pi.members.size(); ++i) {
        OccupancyTensor one = occupancy(mdp, pi.members[i]);
        for (std::size_t h = 0; h < acc.mu.size(); ++h)
            for (std::size_t s = 0; s < acc.mu[h].size(); ++s)
                for (std::size_t a = 0; a < acc.mu[h][s].size(); ++a)
                    acc.mu[h][s][a] += one.mu[h][s][a];
    }
    const double inv = 1.0 / static_cast<double>(pi.members.size());
    for (auto& layer : acc.mu)
        for (auto& row : layer)
            for (auto& v : row) v *= inv;
    return acc;
}

Episode sample_episode(const TabularMDP& mdp, const MarkovPolicy& pi, rng::Stream& stream) {
    require_policy_shape(mdp, pi);
    Episode ep;
    ep.steps.reserve(mdp.horizon);
    int s = mdp.initial_state;
    for (int h = 0; h < mdp.horizon; ++h) {
        const int a = stream.sample_discrete(pi.probs[h][s]);
        const int sn = stream.sample_discrete(mdp.transitions[h][s][a]);
        ep.steps.push_back({h, s, a, mdp.rewards[h][s][a], sn});
        s = sn;
    }
    return ep;
}

Episode sample_episode(const TabularMDP& mdp, const MixturePolicy& pi, rng::Stream& stream) {
    if (pi.members.empty()) throw std::invalid_argument("sample_episode: empty mixture");
    const int member = stream.next_int(static_cast<int>(pi.members.size()));
    return sample_episode(mdp, pi.members[member], stream);
}

std::vector<std::vector<double>> bellman_residual(const TabularMDP& mdp, const QFunction& f, int h) {
    require_valid_mdp(mdp);
    require_q_shape(mdp, f);
    if (h < 0 || h >= mdp.horizon) throw std::invalid_argument("bellman_residual: step out of range");
    const int S = mdp.num_states, A = mdp.num_actions;
    std::vector<double> next_v(S, 0.0);
    for (int sn = 0; sn < S; ++sn) {
        double best = f.q[h + 1][sn][0];
        for (int a = 1; a < A; ++a) best = std::max(best, f.q[h + 1][sn][a]);
        next_v[sn] = best;
    }
    std::vector<std::vector<double>> res(S, std::vector<double>(A, 0.0));
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            double backup = mdp.rewards[h][s][a];
            for (int sn = 0; sn < S; ++sn) backup += mdp.transitions[h][s][a][sn] * next_v[sn];
            res[s][a] = f.q[h][s][a] - backup;
        }
    return res;
}

ValueDifference value_difference_check(const TabularMDP& mdp, const QFunction& f,
                                       const MarkovPolicy& pi_prime) {
    require_q_shape(mdp, f);
    require_policy_shape(mdp, pi_prime);
    const MarkovPolicy pi_f = greedy_policy(f);
    const PolicyEvaluation eval_prime = evaluate_policy(mdp, pi_prime);
    const PolicyEvaluation eval_f = evaluate_policy(mdp, pi_f);
    const OccupancyTensor mu_f = occupancy(mdp, pi_f);
    const OccupancyTensor mu_prime = occupancy(mdp, pi_prime);

    ValueDifference out;
    out.lhs = eval_prime.return_value - eval_f.return_value;
    for (int h = 0; h < mdp.horizon; ++h) {
        const auto res = bellman_residual(mdp, f, h);
        for (int s = 0; s < mdp.num_states; ++s)
            for (int a = 0; a < mdp.num_actions; ++a)
                out.rhs += (mu_f.mu[h][s][a] - mu_prime.mu[h][s][a]) * res[s][a];
    }
    return out;
}

} // namespace meglab
