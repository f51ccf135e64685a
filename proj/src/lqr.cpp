#include "meglab/lqr.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace meglab {

namespace {

void require_square(const Mat& m, int n, const char* name, int h) {
    if (m.rows != n || m.cols != n) {
        std::ostringstream os;
        os << name << "[" << h << "] must be " << n << "x" << n;
        throw std::invalid_argument(os.str());
    }
}

Mat closed_loop(const Mat& a, const Mat& b, const Mat& f) {
    return a + b * f;
}

} // namespace

void LQRSystem::validate() const {
    if (dim_state < 1 || dim_action < 1 || horizon < 1)
        throw std::invalid_argument("LQRSystem: dimensions must be positive");
    if (static_cast<int>(A.size()) != horizon || static_cast<int>(B.size()) != horizon ||
        static_cast<int>(Rs.size()) != horizon || static_cast<int>(Ra.size()) != horizon)
        throw std::invalid_argument("LQRSystem: per-step matrix lists must have length H");
    if (static_cast<int>(initial_state.size()) != dim_state)
        throw std::invalid_argument("LQRSystem: initial_state dimension mismatch");
    for (int h = 0; h < horizon; ++h) {
        require_square(A[h], dim_state, "A", h);
        if (B[h].rows != dim_state || B[h].cols != dim_action)
            throw std::invalid_argument("LQRSystem: B[" + std::to_string(h) + "] shape mismatch");
        require_square(Rs[h], dim_state, "Rs", h);
        require_square(Ra[h], dim_action, "Ra", h);
        if (max_abs_asymmetry(Rs[h]) > 1e-12 || max_abs_asymmetry(Ra[h]) > 1e-12)
            throw std::invalid_argument("LQRSystem: reward matrices must be symmetric");
        const auto eig = jacobi_eigenvalues(Ra[h]);
        if (eig.back() > -1e-9)
            throw std::invalid_argument("LQRSystem: Ra[" + std::to_string(h) +
                                        "] must be negative definite (max eigenvalue " +
                                        std::to_string(eig.back()) + ")");
        for (const Mat* m : {&A[h], &B[h], &Rs[h], &Ra[h]})
            for (double v : m->a)
                if (!std::isfinite(v))
                    throw std::invalid_argument("LQRSystem: non-finite matrix entry");
    }
}

RiccatiSolution riccati(const LQRSystem& sys) {
    sys.validate();
    const int H = sys.horizon;
    RiccatiSolution sol;
    sol.P.assign(H + 1, Mat(sys.dim_state, sys.dim_state));
    sol.F.assign(H, Mat(sys.dim_action, sys.dim_state));
    for (int h = H - 1; h >= 0; --h) {
        const Mat& p_next = sol.P[h + 1];
        const Mat bt_p = transpose(sys.B[h]) * p_next;
        const Mat k = symmetrize(sys.Ra[h] + bt_p * sys.B[h]);
        const auto k_eigs = jacobi_eigenvalues(k);
        if (k_eigs.back() > -1e-9) {
            std::ostringstream os;
            os << "ill-posed maximization at step " << h << ": K has eigenvalue " << k_eigs.back();
            throw IllPosedError(os.str());
        }
        const Mat neg_k = -1.0 * k;
        sol.F[h] = cholesky_solve(neg_k, bt_p * sys.A[h]);
        const Mat at_p = transpose(sys.A[h]) * p_next;
        sol.P[h] = symmetrize(sys.Rs[h] + at_p * sys.A[h] + at_p * sys.B[h] * sol.F[h]);
    }
    return sol;
}

double lqr_value(const LQRSystem& sys, const std::vector<Mat>& gains, const Vec& s1) {
    sys.validate();
    if (static_cast<int>(gains.size()) != sys.horizon)
        throw std::invalid_argument("lqr_value: need one gain per step");
    Mat p(sys.dim_state, sys.dim_state);
    for (int h = sys.horizon - 1; h >= 0; --h) {
        const Mat& f = gains[h];
        if (f.rows != sys.dim_action || f.cols != sys.dim_state)
            throw std::invalid_argument("lqr_value: gain shape mismatch at step " +
                                        std::to_string(h));
        const Mat loop = closed_loop(sys.A[h], sys.B[h], f);
        p = symmetrize(sys.Rs[h] + transpose(f) * sys.Ra[h] * f + transpose(loop) * p * loop);
    }
    return quad_form(p, s1);
}

double lqr_rollout(const LQRSystem& sys, const std::vector<Mat>& gains, const Vec& s1) {
    Vec s = s1;
    double total = 0.0;
    for (int h = 0; h < sys.horizon; ++h) {
        const Vec a = mat_vec(gains[h], s);
        total += quad_form(sys.Rs[h], s) + quad_form(sys.Ra[h], a);
        Vec next = mat_vec(sys.A[h], s);
        const Vec ba = mat_vec(sys.B[h], a);
        for (int i = 0; i < sys.dim_state; ++i) next[i] += ba[i];
        s = std::move(next);
    }
    return total;
}

LQRTaskSet gen_diverse_lqr(const std::vector<Mat>& A, const std::vector<Mat>& B, int horizon,
                           const Vec& initial_state) {
    if (static_cast<int>(A.size()) != horizon || static_cast<int>(B.size()) != horizon)
        throw std::invalid_argument("gen_diverse_lqr: dynamics lists must have length H");
    const int ds = A.at(0).rows;
    const int da = B.at(0).cols;
    LQRTaskSet out;
    for (int h = 0; h < horizon; ++h)
        for (int i = 0; i < ds; ++i) {
            LQRSystem sys;
            sys.dim_state = ds;
            sys.dim_action = da;
            sys.horizon = horizon;
            sys.A = A;
            sys.B = B;
            sys.initial_state = initial_state;
            sys.Rs.assign(horizon, Mat(ds, ds));
            sys.Rs[h](i, i) = 1.0;
            sys.Ra.assign(horizon, -1.0 * Mat::identity(da));
            out.tasks.push_back(std::move(sys));
            out.ids.push_back("lqr_h" + std::to_string(h) + "_i" + std::to_string(i));
        }
    return out;
}

Mat state_covariance(const LQRSystem& sys, const std::vector<std::vector<Mat>>& mixture_gains,
                     const ExplorationSchedule& sched, int t, bool additive) {
    sys.validate();
    if (sched.kind != ScheduleKind::Gaussian)
        throw std::invalid_argument("state_covariance: gaussian schedule required");
    sched.validate();
    if (sched.horizon() != sys.horizon)
        throw std::invalid_argument("state_covariance: schedule horizon mismatch");
    if (mixture_gains.empty())
        throw std::invalid_argument("state_covariance: empty mixture");
    if (t < 0 || t > sys.horizon)
        throw std::invalid_argument("state_covariance: step out of range");

    Mat acc(sys.dim_state, sys.dim_state);
    for (const auto& gains : mixture_gains) {
        if (static_cast<int>(gains.size()) != sys.horizon)
            throw std::invalid_argument("state_covariance: member gain count mismatch");
        Mat m = outer(sys.initial_state, sys.initial_state);
        for (int h = 0; h < t; ++h) {
            const double eps = sched.eps[h];
            const double sig2 = sched.sigma[h] * sched.sigma[h];
            const Mat loop = closed_loop(sys.A[h], sys.B[h], gains[h]);
            const Mat exploit = loop * m * transpose(loop);
            const Mat noise = sig2 * (sys.B[h] * transpose(sys.B[h]));
            Mat explore = additive ? exploit + noise
                                   : sys.A[h] * m * transpose(sys.A[h]) + noise;
            m = symmetrize((1.0 - eps) * exploit + eps * explore);
        }
        acc = acc + m;
    }
    return (1.0 / static_cast<double>(mixture_gains.size())) * acc;
}

LqrRegularity lqr_regularity(const LQRSystem& sys, const std::vector<std::vector<Mat>>& policies,
                             int num_random_directions, std::uint64_t seed) {
    sys.validate();
    LqrRegularity out;
    for (const auto& gains : policies) {
        Vec s = sys.initial_state;
        out.b4 = std::max(out.b4, norm2(s));
        for (int h = 0; h < sys.horizon; ++h) {
            const Vec a = mat_vec(gains.at(h), s);
            out.b5 = std::max(out.b5, norm2(a));
            Vec next = mat_vec(sys.A[h], s);
            const Vec ba = mat_vec(sys.B[h], a);
            for (int i = 0; i < sys.dim_state; ++i) next[i] += ba[i];
            s = std::move(next);
            out.b4 = std::max(out.b4, norm2(s));
        }
    }

    std::vector<Vec> directions;
    for (int i = 0; i < sys.dim_state; ++i) {
        Vec e(sys.dim_state, 0.0);
        e[i] = 1.0;
        directions.push_back(e);
        for (auto& v : e) v = -v;
        directions.push_back(e);
    }
    rng::Stream stream(rng::derive(seed, {0x62335CULL}));
    for (int r = 0; r < num_random_directions; ++r) {
        Vec dir(sys.dim_state);
        double norm = 0.0;
        do {
            for (auto& v : dir) v = stream.next_gaussian();
            norm = norm2(dir);
        } while (norm == 0.0);
        for (auto& v : dir) v /= norm;
        directions.push_back(std::move(dir));
    }

    out.b3 = std::numeric_limits<double>::infinity();
    for (int t = 1; t <= sys.horizon; ++t) {
        for (const auto& dir : directions) {
            // max over ||a_j|| <= 1 of dir^T s_t; each action contributes the
            // norm of the back-propagated direction (scaled gradient action).
            Vec g = dir;
            double total = 0.0;
            for (int j = t - 1; j >= 0; --j) {
                total += norm2(mat_vec(transpose(sys.B[j]), g));
                g = mat_vec(transpose(sys.A[j]), g);
            }
            total += dot(g, sys.initial_state);
            out.b3 = std::min(out.b3, total);
            out.b3_table.push_back({t, dir, total});
        }
    }
    return out;
}

double riccati_optimality_check(const LQRSystem& sys, const RiccatiSolution& sol, int trials,
                                std::uint64_t seed, int grid_points_per_axis) {
    sys.validate();
    rng::Stream stream(rng::derive(seed, {0x52CCULL}));
    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        const int h = stream.next_int(sys.horizon);
        Vec s(sys.dim_state);
        for (auto& v : s) v = stream.next_gaussian();

        const double value_p = quad_form(sol.P[h], s);
        auto q_of = [&](const Vec& a) {
            Vec next = mat_vec(sys.A[h], s);
            const Vec ba = mat_vec(sys.B[h], a);
            for (int i = 0; i < sys.dim_state; ++i) next[i] += ba[i];
            return quad_form(sys.Rs[h], s) + quad_form(sys.Ra[h], a) +
                   quad_form(sol.P[h + 1], next);
        };

        const Vec a_star = mat_vec(sol.F[h], s);
        worst = std::max(worst, std::abs(value_p - q_of(a_star)));

        // Dense grid in the box of radius 1 around the analytic maximizer.
        const int k = grid_points_per_axis;
        std::vector<int> idx(sys.dim_action, 0);
        Vec a(sys.dim_action);
        while (true) {
            for (int i = 0; i < sys.dim_action; ++i)
                a[i] = a_star[i] - 1.0 + 2.0 * idx[i] / static_cast<double>(k - 1);
            worst = std::max(worst, q_of(a) - value_p);
            int axis = 0;
            while (axis < sys.dim_action && ++idx[axis] == k) {
                idx[axis] = 0;
                ++axis;
            }
            if (axis == sys.dim_action) break;
        }
    }
    return worst;
}

} // namespace meglab
