#include "meglab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace meglab {

namespace {

void check_same_shape(const Mat& x, const Mat& y, const char* op) {
    if (x.rows != y.rows || x.cols != y.cols)
        throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

} // namespace

Mat Mat::identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat operator+(const Mat& x, const Mat& y) {
    check_same_shape(x, y, "Mat+");
    Mat r = x;
    for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] += y.a[i];
    return r;
}

Mat operator-(const Mat& x, const Mat& y) {
    check_same_shape(x, y, "Mat-");
    Mat r = x;
    for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] -= y.a[i];
    return r;
}

Mat operator*(const Mat& x, const Mat& y) {
    if (x.cols != y.rows) throw std::invalid_argument("Mat*: inner dimension mismatch");
    Mat r(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int k = 0; k < x.cols; ++k) {
            const double xik = x(i, k);
            if (xik == 0.0) continue;
            for (int j = 0; j < y.cols; ++j) r(i, j) += xik * y(k, j);
        }
    return r;
}

Mat operator*(double s, const Mat& x) {
    Mat r = x;
    for (auto& v : r.a) v *= s;
    return r;
}

Mat transpose(const Mat& x) {
    Mat r(x.cols, x.rows);
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < x.cols; ++j) r(j, i) = x(i, j);
    return r;
}

Vec mat_vec(const Mat& x, const Vec& v) {
    if (x.cols != static_cast<int>(v.size()))
        throw std::invalid_argument("mat_vec: dimension mismatch");
    Vec r(x.rows, 0.0);
    for (int i = 0; i < x.rows; ++i) {
        double acc = 0.0;
        for (int j = 0; j < x.cols; ++j) acc += x(i, j) * v[j];
        r[i] = acc;
    }
    return r;
}

Mat outer(const Vec& u, const Vec& v) {
    Mat r(static_cast<int>(u.size()), static_cast<int>(v.size()));
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) r(static_cast<int>(i), static_cast<int>(j)) = u[i] * v[j];
    return r;
}

double dot(const Vec& u, const Vec& v) {
    if (u.size() != v.size()) throw std::invalid_argument("dot: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i];
    return acc;
}

double norm2(const Vec& v) {
    return std::sqrt(dot(v, v));
}

double quad_form(const Mat& m, const Vec& s) {
    return dot(s, mat_vec(m, s));
}

Mat symmetrize(const Mat& x) {
    if (x.rows != x.cols) throw std::invalid_argument("symmetrize: square matrix required");
    Mat r(x.rows, x.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < x.cols; ++j) r(i, j) = 0.5 * (x(i, j) + x(j, i));
    return r;
}

double max_abs_asymmetry(const Mat& x) {
    double worst = 0.0;
    for (int i = 0; i < x.rows; ++i)
        for (int j = i + 1; j < x.cols; ++j)
            worst = std::max(worst, std::abs(x(i, j) - x(j, i)));
    return worst;
}

bool cholesky(const Mat& spd, Mat& lower) {
    if (spd.rows != spd.cols) throw std::invalid_argument("cholesky: square matrix required");
    const int n = spd.rows;
    lower = Mat(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double sum = spd(i, j);
            for (int k = 0; k < j; ++k) sum -= lower(i, k) * lower(j, k);
            if (i == j) {
                if (sum <= 0.0) return false;
                lower(i, i) = std::sqrt(sum);
            } else {
                lower(i, j) = sum / lower(j, j);
            }
        }
    }
    return true;
}

Mat cholesky_solve(const Mat& spd, const Mat& rhs) {
    if (spd.rows != rhs.rows) throw std::invalid_argument("cholesky_solve: dimension mismatch");
    Mat lower;
    if (!cholesky(spd, lower)) throw std::invalid_argument("cholesky_solve: matrix not positive definite");
    const int n = spd.rows;
    Mat x(rhs.rows, rhs.cols);
    for (int c = 0; c < rhs.cols; ++c) {
        // forward: L y = rhs[:,c]
        Vec y(n);
        for (int i = 0; i < n; ++i) {
            double sum = rhs(i, c);
            for (int k = 0; k < i; ++k) sum -= lower(i, k) * y[k];
            y[i] = sum / lower(i, i);
        }
        // backward: L^T x = y
        for (int i = n - 1; i >= 0; --i) {
            double sum = y[i];
            for (int k = i + 1; k < n; ++k) sum -= lower(k, i) * x(k, c);
            x(i, c) = sum / lower(i, i);
        }
    }
    return x;
}

Vec cholesky_solve(const Mat& spd, const Vec& rhs) {
    Mat col(static_cast<int>(rhs.size()), 1);
    for (std::size_t i = 0; i < rhs.size(); ++i) col(static_cast<int>(i), 0) = rhs[i];
    Mat x = cholesky_solve(spd, col);
    Vec r(rhs.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) r[i] = x(static_cast<int>(i), 0);
    return r;
}

std::vector<double> jacobi_eigenvalues(const Mat& sym) {
    if (sym.rows != sym.cols) throw std::invalid_argument("jacobi_eigenvalues: square matrix required");
    const int n = sym.rows;
    if (max_abs_asymmetry(sym) > 1e-9)
        throw std::invalid_argument("jacobi_eigenvalues: input not symmetric within tolerance");
    Mat m = symmetrize(sym);

    double frob = 0.0;
    for (double v : m.a) frob += v * v;
    frob = std::sqrt(frob);
    const double target = 1e-12 * std::max(1.0, frob);

    auto off_norm = [&]() {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += 2.0 * m(i, j) * m(i, j);
        return std::sqrt(s);
    };

    const int max_sweeps = 128;
    for (int sweep = 0; sweep < max_sweeps && off_norm() > target; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = m(p, q);
                if (apq == 0.0) continue;
                const double app = m(p, p);
                const double aqq = m(q, q);
                const double tau = (aqq - app) / (2.0 * apq);
                // Stable tangent of the rotation angle.
                const double t = (tau >= 0.0)
                                     ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                     : -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double mkp = m(k, p);
                    const double mkq = m(k, q);
                    m(k, p) = c * mkp - s * mkq;
                    m(k, q) = s * mkp + c * mkq;
                }
                for (int k = 0; k < n; ++k) {
                    const double mpk = m(p, k);
                    const double mqk = m(q, k);
                    m(p, k) = c * mpk - s * mqk;
                    m(q, k) = s * mpk + c * mqk;
                }
            }
        }
    }

    std::vector<double> eig(n);
    for (int i = 0; i < n; ++i) eig[i] = m(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

} // namespace meglab
