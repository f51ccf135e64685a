#include "meglab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace meglab {

Dataset::Dataset(int num_states, int num_actions, int horizon)
    : num_states_(num_states), num_actions_(num_actions), horizon_(horizon) {
    if (num_states < 1 || num_actions < 1 || horizon < 1)
        throw std::invalid_argument("Dataset: shape entries must be positive");
    const std::size_t cells =
        static_cast<std::size_t>(horizon) * num_states * num_actions;
    count_.assign(cells, 0);
    reward_sum_.assign(cells, 0.0);
    next_count_.assign(cells * num_states, 0);
}

void Dataset::add_record(const TransitionRecord& rec) {
    if (rec.h < 0 || rec.h >= horizon_)
        throw std::invalid_argument("Dataset: record step " + std::to_string(rec.h) +
                                    " outside 0..H-1");
    if (rec.state < 0 || rec.state >= num_states_ || rec.next_state < 0 ||
        rec.next_state >= num_states_)
        throw std::invalid_argument("Dataset: record state out of range");
    if (rec.action < 0 || rec.action >= num_actions_)
        throw std::invalid_argument("Dataset: record action out of range");
    records_.push_back(rec);
    record_episode_.push_back(-1);
    const std::size_t idx = index(rec.h, rec.state, rec.action);
    count_[idx] += 1;
    reward_sum_[idx] += rec.reward;
    next_count_[idx * static_cast<std::size_t>(num_states_) + rec.next_state] += 1;
}

void Dataset::add_episode(const Episode& episode) {
    for (const auto& step : episode.steps) {
        add_record({step.h, step.state, step.action, step.reward, step.next_state});
        record_episode_.back() = static_cast<std::int32_t>(num_episodes_);
    }
    ++num_episodes_;
}

QFunction fqi_tabular(const Dataset& data, const FqiOptions& options) {
    const int S = data.num_states(), A = data.num_actions(), H = data.horizon();
    QFunction f = QFunction::zeros(S, A, H);
    for (int h = H - 1; h >= 0; --h) {
        std::vector<double> next_v(S, 0.0);
        if (h + 1 < H)
            for (int sn = 0; sn < S; ++sn) {
                double best = f.q[h + 1][sn][0];
                for (int a = 1; a < A; ++a) best = std::max(best, f.q[h + 1][sn][a]);
                next_v[sn] = best;
            }
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                const std::int64_t n = data.visit_count(h, s, a);
                if (n == 0) {
                    f.q[h][s][a] = options.unvisited_default;
                    continue;
                }
                double total = data.reward_sum(h, s, a);
                for (int sn = 0; sn < S; ++sn) {
                    const std::int64_t c = data.next_count(h, s, a, sn);
                    if (c != 0) total += static_cast<double>(c) * next_v[sn];
                }
                f.q[h][s][a] = total / static_cast<double>(n);
            }
    }
    return f;
}

double LinearQ::value(const FeatureMap& phi, int h, int s, int a) const {
    return dot(phi[h][s][a], w[h]);
}

double LinearQ::next_state_value(const FeatureMap& phi, int h_next, int s_next) const {
    if (h_next >= static_cast<int>(w.size())) return 0.0;
    const auto& row = phi[h_next][s_next];
    double best = dot(row[0], w[h_next]);
    for (std::size_t a = 1; a < row.size(); ++a) best = std::max(best, dot(row[a], w[h_next]));
    return best;
}

LinearQ fqi_linear(const Dataset& data, const FeatureMap& phi, double lambda) {
    const int S = data.num_states(), A = data.num_actions(), H = data.horizon();
    if (static_cast<int>(phi.size()) != H)
        throw std::invalid_argument("fqi_linear: feature horizon mismatch");
    const int d = static_cast<int>(phi.at(0).at(0).at(0).size());
    for (int h = 0; h < H; ++h)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a)
                if (static_cast<int>(phi[h][s][a].size()) != d)
                    throw std::invalid_argument("fqi_linear: feature dimension mismatch at (h=" +
                                                std::to_string(h) + ", s=" + std::to_string(s) +
                                                ", a=" + std::to_string(a) + ")");

    LinearQ lq;
    lq.dim = d;
    lq.w.assign(H, Vec(d, 0.0));
    const double radius = 2.0 * std::sqrt(static_cast<double>(d));

    for (int h = H - 1; h >= 0; --h) {
        // Next-layer state values under the already-fitted weights.
        std::vector<double> next_v(S, 0.0);
        if (h + 1 < H)
            for (int sn = 0; sn < S; ++sn) next_v[sn] = lq.next_state_value(phi, h + 1, sn);

        Mat gram(d, d);
        for (int i = 0; i < d; ++i) gram(i, i) = lambda;
        Vec rhs(d, 0.0);
        bool any = false;
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                const std::int64_t n = data.visit_count(h, s, a);
                if (n == 0) continue;
                any = true;
                double target_sum = data.reward_sum(h, s, a);
                for (int sn = 0; sn < S; ++sn) {
                    const std::int64_t c = data.next_count(h, s, a, sn);
                    if (c != 0) target_sum += static_cast<double>(c) * next_v[sn];
                }
                if (!std::isfinite(target_sum))
                    throw std::invalid_argument("fqi_linear: non-finite regression target");
                const Vec& feats = phi[h][s][a];
                for (int i = 0; i < d; ++i) {
                    const double fi = feats[i];
                    if (fi == 0.0) continue;
                    rhs[i] += fi * target_sum;
                    const double nf = static_cast<double>(n) * fi;
                    for (int j = 0; j < d; ++j) gram(i, j) += nf * feats[j];
                }
            }
        if (any) {
            Vec w = cholesky_solve(gram, rhs);
            const double norm = norm2(w);
            if (norm > radius)
                for (auto& v : w) v *= radius / norm;
            lq.w[h] = std::move(w);
        }
    }
    return lq;
}

QFunction linear_q_to_table(const LinearQ& lq, const FeatureMap& phi) {
    const int H = static_cast<int>(phi.size());
    const int S = static_cast<int>(phi.at(0).size());
    const int A = static_cast<int>(phi.at(0).at(0).size());
    QFunction f = QFunction::zeros(S, A, H);
    for (int h = 0; h < H; ++h)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) f.q[h][s][a] = lq.value(phi, h, s, a);
    return f;
}

} // namespace meglab
