#include "meglab/exploration.hpp"

#include <stdexcept>
#include <string>

namespace meglab {

void ExplorationSchedule::validate() const {
    if (eps.empty()) throw std::invalid_argument("ExplorationSchedule: empty eps");
    for (std::size_t h = 0; h < eps.size(); ++h)
        if (eps[h] < 0.0 || eps[h] > 1.0)
            throw std::invalid_argument("ExplorationSchedule: eps[" + std::to_string(h) +
                                        "] outside [0,1]");
    if (kind == ScheduleKind::Gaussian) {
        if (sigma.size() != eps.size())
            throw std::invalid_argument("ExplorationSchedule: sigma length mismatch");
        for (std::size_t h = 0; h < sigma.size(); ++h)
            if (sigma[h] <= 0.0)
                throw std::invalid_argument("ExplorationSchedule: sigma[" + std::to_string(h) +
                                            "] must be positive");
    }
}

ExplorationSchedule default_schedule(int horizon, ScheduleVariant variant) {
    if (horizon < 1) throw std::invalid_argument("default_schedule: horizon must be >= 1");
    ExplorationSchedule sched;
    sched.kind = ScheduleKind::EpsGreedy;
    sched.eps.resize(horizon);
    for (int h = 1; h <= horizon; ++h)
        sched.eps[h - 1] = (variant == ScheduleVariant::Thm2) ? 1.0 / (h + 1) : 1.0 / h;
    return sched;
}

ExplorationSchedule constant_schedule(int horizon, double eps) {
    if (horizon < 1) throw std::invalid_argument("constant_schedule: horizon must be >= 1");
    ExplorationSchedule sched;
    sched.kind = ScheduleKind::EpsGreedy;
    sched.eps.assign(horizon, eps);
    sched.validate();
    return sched;
}

ExplorationSchedule gaussian_schedule(int horizon, const std::vector<double>& eps,
                                      const std::vector<double>& sigma) {
    ExplorationSchedule sched;
    sched.kind = ScheduleKind::Gaussian;
    sched.eps = eps;
    sched.sigma = sigma;
    if (static_cast<int>(eps.size()) != horizon || static_cast<int>(sigma.size()) != horizon)
        throw std::invalid_argument("gaussian_schedule: length mismatch");
    sched.validate();
    return sched;
}

MarkovPolicy eps_greedy(const MarkovPolicy& pi, const ExplorationSchedule& sched) {
    if (sched.kind != ScheduleKind::EpsGreedy)
        throw std::invalid_argument("eps_greedy: schedule kind must be epsilon_greedy");
    sched.validate();
    if (pi.probs.size() != sched.eps.size())
        throw std::invalid_argument("eps_greedy: schedule horizon mismatch");
    MarkovPolicy out = pi;
    for (std::size_t h = 0; h < out.probs.size(); ++h) {
        const double eps = sched.eps[h];
        for (auto& row : out.probs[h]) {
            const double uniform = eps / static_cast<double>(row.size());
            for (auto& p : row) p = (1.0 - eps) * p + uniform;
        }
    }
    return out;
}

MixturePolicy mixture(std::vector<MarkovPolicy> policies) {
    if (policies.empty()) throw std::invalid_argument("mixture: empty policy list");
    const auto& first = policies.front();
    for (const auto& pi : policies) {
        if (pi.probs.size() != first.probs.size())
            throw std::invalid_argument("mixture: members disagree on horizon");
        for (std::size_t h = 0; h < pi.probs.size(); ++h) {
            if (pi.probs[h].size() != first.probs[h].size())
                throw std::invalid_argument("mixture: members disagree on state count");
            for (std::size_t s = 0; s < pi.probs[h].size(); ++s)
                if (pi.probs[h][s].size() != first.probs[h][s].size())
                    throw std::invalid_argument("mixture: members disagree on action count");
        }
    }
    MixturePolicy mix;
    mix.members = std::move(policies);
    return mix;
}

double survival_then_explore(const ExplorationSchedule& sched, int h_one_based) {
    if (h_one_based < 1 || h_one_based > sched.horizon())
        throw std::invalid_argument("survival_then_explore: step out of range");
    double prod = 1.0;
    for (int h = 1; h < h_one_based; ++h) prod *= 1.0 - sched.eps[h - 1];
    return prod * sched.eps[h_one_based - 1];
}

GaussianGainPolicy gaussian_expl(std::vector<Mat> gains, const ExplorationSchedule& sched,
                                 bool additive) {
    if (sched.kind != ScheduleKind::Gaussian)
        throw std::invalid_argument("gaussian_expl: schedule kind must be gaussian");
    sched.validate();
    if (gains.size() != sched.eps.size())
        throw std::invalid_argument("gaussian_expl: gain count must match horizon");
    GaussianGainPolicy policy;
    policy.gains = std::move(gains);
    policy.sched = sched;
    policy.additive = additive;
    return policy;
}

Vec GaussianGainPolicy::act(int h, const Vec& state, rng::Stream& stream) const {
    const Mat& F = gains.at(h);
    Vec action = mat_vec(F, state);
    const double eps = sched.eps.at(h);
    // The branch draw is consumed even when eps pins the outcome, so action
    // sequences stay aligned across schedules under a shared seed.
    const bool explore = stream.next_double() < eps;
    if (!explore) return action;
    const double sigma = sched.sigma.at(h);
    if (!additive)
        for (auto& v : action) v = 0.0;
    for (auto& v : action) v += sigma * stream.next_gaussian();
    return action;
}

} // namespace meglab
