#pragma once

#include "meglab/linalg.hpp"
#include "meglab/mdp.hpp"
#include "meglab/rng.hpp"

#include <vector>

namespace meglab {

enum class ScheduleKind { EpsGreedy, Gaussian };

// Named per-step schedules:
//   Thm2  -> eps_h = 1/(h+1)  (h counted from 1, so eps = 1/2, 1/3, ...)
//   PropC -> eps_h = 1/h      (eps = 1, 1/2, 1/3, ...)
enum class ScheduleVariant { Thm2, PropC };

struct ExplorationSchedule {
    ScheduleKind kind = ScheduleKind::EpsGreedy;
    std::vector<double> eps;   // length H, entries in [0, 1]
    std::vector<double> sigma; // length H, strictly positive (Gaussian kind only)

    int horizon() const { return static_cast<int>(eps.size()); }
    void validate() const;
};

ExplorationSchedule default_schedule(int horizon, ScheduleVariant variant);
ExplorationSchedule constant_schedule(int horizon, double eps);
ExplorationSchedule gaussian_schedule(int horizon, const std::vector<double>& eps,
                                      const std::vector<double>& sigma);

// expl(pi)_h(a|s) = (1 - eps_h) pi_h(a|s) + eps_h / A.
MarkovPolicy eps_greedy(const MarkovPolicy& pi, const ExplorationSchedule& sched);

MixturePolicy mixture(std::vector<MarkovPolicy> policies);

// Probability of following the schedule's greedy branch through steps
// 1..h-1 and exploring at step h (1-based h):
//   prod_{h'<h} (1 - eps_h') * eps_h.
double survival_then_explore(const ExplorationSchedule& sched, int h_one_based);

// Gaussian myopic exploration over per-step linear gains. At each step the
// action is the gain response F_h s with probability 1-eps_h and otherwise a
// draw from the exploration component: pure N(0, sigma_h^2 I) in the default
// mixture mode, or F_h s + N(0, sigma_h^2 I) in additive mode.
struct GaussianGainPolicy {
    std::vector<Mat> gains; // F[h], each d_a x d_s
    ExplorationSchedule sched;
    bool additive = false;

    Vec act(int h, const Vec& state, rng::Stream& stream) const;
};

GaussianGainPolicy gaussian_expl(std::vector<Mat> gains, const ExplorationSchedule& sched,
                                 bool additive = false);

} // namespace meglab
