#include "meglab/linear.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace meglab {

namespace {

void require_linear_shapes(const LinearMDP& lm) {
    if (lm.num_states < 1 || lm.num_actions < 1 || lm.horizon < 1 || lm.dim < 1)
        throw std::invalid_argument("LinearMDP: dimensions must be positive");
    if (lm.initial_state < 0 || lm.initial_state >= lm.num_states)
        throw std::invalid_argument("LinearMDP: initial_state out of range");
    if (static_cast<int>(lm.phi.size()) != lm.horizon ||
        static_cast<int>(lm.nu.size()) != lm.horizon ||
        static_cast<int>(lm.theta.size()) != lm.horizon)
        throw std::invalid_argument("LinearMDP: axis h size mismatch");
    for (int h = 0; h < lm.horizon; ++h) {
        if (static_cast<int>(lm.phi[h].size()) != lm.num_states)
            throw std::invalid_argument("LinearMDP: phi axis s mismatch at h=" + std::to_string(h));
        if (static_cast<int>(lm.nu[h].size()) != lm.num_states)
            throw std::invalid_argument("LinearMDP: nu axis s mismatch at h=" + std::to_string(h));
        if (static_cast<int>(lm.theta[h].size()) != lm.dim)
            throw std::invalid_argument("LinearMDP: theta axis k mismatch at h=" + std::to_string(h));
        for (int s = 0; s < lm.num_states; ++s) {
            if (static_cast<int>(lm.phi[h][s].size()) != lm.num_actions)
                throw std::invalid_argument("LinearMDP: phi axis a mismatch at (h=" +
                                            std::to_string(h) + ", s=" + std::to_string(s) + ")");
            if (static_cast<int>(lm.nu[h][s].size()) != lm.dim)
                throw std::invalid_argument("LinearMDP: nu axis k mismatch at (h=" +
                                            std::to_string(h) + ", s=" + std::to_string(s) + ")");
            for (int a = 0; a < lm.num_actions; ++a)
                if (static_cast<int>(lm.phi[h][s][a].size()) != lm.dim)
                    throw std::invalid_argument("LinearMDP: phi axis k mismatch at (h=" +
                                                std::to_string(h) + ", s=" + std::to_string(s) +
                                                ", a=" + std::to_string(a) + ")");
        }
    }
}

} // namespace

ValidationReport validate_linear(const LinearMDP& lm) {
    require_linear_shapes(lm);
    ValidationReport report;
    const double sqrt_d = std::sqrt(static_cast<double>(lm.dim));
    for (int h = 0; h < lm.horizon; ++h) {
        Vec nu_total(lm.dim, 0.0);
        for (int s = 0; s < lm.num_states; ++s) {
            for (int k = 0; k < lm.dim; ++k) {
                if (lm.nu[h][s][k] < 0.0) {
                    std::ostringstream os;
                    os << "negative nu entry at (h=" << h << ", s=" << s << ", k=" << k << ")";
                    report.errors.push_back(os.str());
                }
                nu_total[k] += lm.nu[h][s][k];
            }
            if (norm2(lm.nu[h][s]) > sqrt_d + 1e-12) {
                std::ostringstream os;
                os << "||nu|| = " << norm2(lm.nu[h][s]) << " exceeds sqrt(d) at (h=" << h
                   << ", s=" << s << ")";
                report.errors.push_back(os.str());
            }
        }
        if (norm2(lm.theta[h]) > sqrt_d + 1e-12) {
            std::ostringstream os;
            os << "||theta|| = " << norm2(lm.theta[h]) << " exceeds sqrt(d) at h=" << h;
            report.errors.push_back(os.str());
        }
        for (int s = 0; s < lm.num_states; ++s)
            for (int a = 0; a < lm.num_actions; ++a) {
                const Vec& feats = lm.phi[h][s][a];
                for (int k = 0; k < lm.dim; ++k)
                    if (feats[k] < 0.0) {
                        std::ostringstream os;
                        os << "negative phi entry at (h=" << h << ", s=" << s << ", a=" << a
                           << ", k=" << k << ")";
                        report.errors.push_back(os.str());
                    }
                if (norm2(feats) > 1.0 + 1e-12) {
                    std::ostringstream os;
                    os << "||phi|| = " << norm2(feats) << " exceeds 1 at (h=" << h << ", s=" << s
                       << ", a=" << a << ")";
                    report.errors.push_back(os.str());
                }
                const double total = dot(feats, nu_total);
                if (std::abs(total - 1.0) > 1e-10) {
                    std::ostringstream os;
                    os << "<phi, sum_s' nu> = " << total << " at (h=" << h << ", s=" << s
                       << ", a=" << a << ")";
                    report.errors.push_back(os.str());
                }
                const double reward = dot(feats, lm.theta[h]);
                if (reward < -1e-12 || reward > 1.0 + 1e-12) {
                    std::ostringstream os;
                    os << "induced reward " << reward << " outside [0,1] at (h=" << h
                       << ", s=" << s << ", a=" << a << ")";
                    report.errors.push_back(os.str());
                }
            }
    }
    return report;
}

TabularMDP to_tabular(const LinearMDP& lm) {
    const ValidationReport report = validate_linear(lm);
    if (!report.hard_ok())
        throw std::invalid_argument("to_tabular: linear MDP normalization violated: " +
                                    report.errors.front());
    TabularMDP m = TabularMDP::zeros(lm.num_states, lm.num_actions, lm.horizon, lm.initial_state);
    for (int h = 0; h < lm.horizon; ++h)
        for (int s = 0; s < lm.num_states; ++s)
            for (int a = 0; a < lm.num_actions; ++a) {
                for (int sn = 0; sn < lm.num_states; ++sn)
                    m.transitions[h][s][a][sn] = dot(lm.phi[h][s][a], lm.nu[h][sn]);
                // Induced rewards can graze the interval ends by rounding.
                m.rewards[h][s][a] = std::clamp(dot(lm.phi[h][s][a], lm.theta[h]), 0.0, 1.0);
            }
    return m;
}

LinearMDP embed_tabular(const TabularMDP& mdp) {
    require_valid_mdp(mdp);
    LinearMDP lm;
    lm.num_states = mdp.num_states;
    lm.num_actions = mdp.num_actions;
    lm.horizon = mdp.horizon;
    lm.initial_state = mdp.initial_state;
    lm.dim = mdp.num_states * mdp.num_actions;
    lm.phi.assign(mdp.horizon,
                  std::vector<std::vector<Vec>>(mdp.num_states,
                                                std::vector<Vec>(mdp.num_actions, Vec(lm.dim, 0.0))));
    lm.nu.assign(mdp.horizon, std::vector<Vec>(mdp.num_states, Vec(lm.dim, 0.0)));
    lm.theta.assign(mdp.horizon, Vec(lm.dim, 0.0));
    for (int h = 0; h < mdp.horizon; ++h)
        for (int s = 0; s < mdp.num_states; ++s)
            for (int a = 0; a < mdp.num_actions; ++a) {
                const int k = s * mdp.num_actions + a;
                lm.phi[h][s][a][k] = 1.0;
                lm.theta[h][k] = mdp.rewards[h][s][a];
                for (int sn = 0; sn < mdp.num_states; ++sn)
                    lm.nu[h][sn][k] = mdp.transitions[h][s][a][sn];
            }
    return lm;
}

namespace {

CovarianceMatrix covariance_from_occupancy(const LinearMDP& lm, const OccupancyTensor& mu, int h,
                                           std::string desc) {
    CovarianceMatrix cov;
    cov.h = h;
    cov.policy_desc = std::move(desc);
    cov.m = Mat(lm.dim, lm.dim);
    for (int s = 0; s < lm.num_states; ++s)
        for (int a = 0; a < lm.num_actions; ++a) {
            const double mass = mu.mu[h][s][a];
            if (mass == 0.0) continue;
            const Vec& feats = lm.phi[h][s][a];
            for (int i = 0; i < lm.dim; ++i) {
                const double fi = mass * feats[i];
                if (fi == 0.0) continue;
                for (int j = 0; j < lm.dim; ++j) cov.m(i, j) += fi * feats[j];
            }
        }
    return cov;
}

} // namespace

CovarianceMatrix feature_covariance(const LinearMDP& lm, const MarkovPolicy& pi, int h) {
    if (h < 0 || h >= lm.horizon)
        throw std::invalid_argument("feature_covariance: step out of range");
    return covariance_from_occupancy(lm, occupancy(to_tabular(lm), pi), h, "markov");
}

CovarianceMatrix feature_covariance(const LinearMDP& lm, const MixturePolicy& pi, int h) {
    if (h < 0 || h >= lm.horizon)
        throw std::invalid_argument("feature_covariance: step out of range");
    return covariance_from_occupancy(lm, occupancy(to_tabular(lm), pi), h, "mixture");
}

double min_eigenvalue(const CovarianceMatrix& cov) {
    return jacobi_eigenvalues(cov.m).front();
}

LinearTaskSet gen_diverse_linear(const LinearMDP& dynamics) {
    require_linear_shapes(dynamics);
    LinearTaskSet out;
    for (int h = 0; h < dynamics.horizon; ++h)
        for (int i = 0; i < dynamics.dim; ++i) {
            LinearMDP task = dynamics;
            for (auto& th : task.theta) std::fill(th.begin(), th.end(), 0.0);
            task.theta[h][i] = 1.0;
            out.tasks.push_back(std::move(task));
            out.ids.push_back("lin_h" + std::to_string(h) + "_i" + std::to_string(i));
        }
    return out;
}

namespace {

// max_pi E_pi[dir^T phi_h(s_h, a_h)] by backward DP with the linear payoff
// placed at step h.
double max_directional_feature(const LinearMDP& lm, const TabularMDP& tab, const Vec& dir, int h) {
    std::vector<double> val(lm.num_states, 0.0);
    for (int s = 0; s < lm.num_states; ++s) {
        double best = dot(lm.phi[h][s][0], dir);
        for (int a = 1; a < lm.num_actions; ++a) best = std::max(best, dot(lm.phi[h][s][a], dir));
        val[s] = best;
    }
    for (int t = h - 1; t >= 0; --t) {
        std::vector<double> cur(lm.num_states, 0.0);
        for (int s = 0; s < lm.num_states; ++s) {
            double best = 0.0;
            for (int a = 0; a < lm.num_actions; ++a) {
                double acc = 0.0;
                for (int sn = 0; sn < lm.num_states; ++sn)
                    acc += tab.transitions[t][s][a][sn] * val[sn];
                if (a == 0 || acc > best) best = acc;
            }
            cur[s] = best;
        }
        val = std::move(cur);
    }
    return val[lm.initial_state];
}

} // namespace

CoverageB1 coverage_b1(const LinearMDP& lm, int h, int num_random_directions, std::uint64_t seed) {
    if (h < 0 || h >= lm.horizon) throw std::invalid_argument("coverage_b1: step out of range");
    const TabularMDP tab = to_tabular(lm);
    CoverageB1 out;
    std::vector<Vec> directions;
    for (int i = 0; i < lm.dim; ++i) {
        Vec e(lm.dim, 0.0);
        e[i] = 1.0;
        directions.push_back(std::move(e));
    }
    rng::Stream stream(rng::derive(seed, {0x6276'31ULL, static_cast<std::uint64_t>(h)}));
    for (int r = 0; r < num_random_directions; ++r) {
        Vec dir(lm.dim);
        double norm = 0.0;
        do {
            for (auto& v : dir) v = std::abs(stream.next_gaussian());
            norm = norm2(dir);
        } while (norm == 0.0);
        for (auto& v : dir) v /= norm;
        directions.push_back(std::move(dir));
    }
    out.b1 = std::numeric_limits<double>::infinity();
    for (auto& dir : directions) {
        const double value = max_directional_feature(lm, tab, dir, h);
        out.b1 = std::min(out.b1, value);
        out.table.push_back({std::move(dir), value});
    }
    return out;
}

LemmaLinear2Result check_lemma_linear2(const std::vector<LinearMDP>& step_h_tasks, int h,
                                       const ExplorationSchedule& sched, double b1) {
    if (step_h_tasks.empty())
        throw std::invalid_argument("check_lemma_linear2: empty task list");
    const LinearMDP& first = step_h_tasks.front();
    const int d = first.dim, A = first.num_actions, H = first.horizon;
    if (static_cast<int>(step_h_tasks.size()) != d)
        throw std::invalid_argument("check_lemma_linear2: expected exactly d step-h tasks");
    if (h < 0 || h + 1 >= H)
        throw std::invalid_argument("check_lemma_linear2: need h with h+1 <= H-1");

    LemmaLinear2Result out;
    out.h = h;
    std::vector<MarkovPolicy> explored;
    explored.reserve(d);
    for (const auto& task : step_h_tasks) {
        const TabularMDP tab = to_tabular(task);
        const OptimalValues opt = optimal_values(tab);
        if (opt.v[0][tab.initial_state] <= 0.0) out.degenerate = true;
        explored.push_back(eps_greedy(opt.greedy, sched));
    }
    const CovarianceMatrix cov = feature_covariance(first, mixture(std::move(explored)), h + 1);
    out.lhs = min_eigenvalue(cov);
    out.rhs = survival_then_explore(sched, h + 1) * b1 * b1 / (2.0 * d * A);
    out.margin = out.lhs - out.rhs;
    return out;
}

} // namespace meglab
