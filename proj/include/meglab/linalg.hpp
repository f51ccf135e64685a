#pragma once

#include <cstddef>
#include <vector>

namespace meglab {

using Vec = std::vector<double>;

// Minimal dense row-major matrix. Dimensions here never exceed a few dozen,
// so plain O(n^3) kernels are ample and keep the library dependency-free.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

    static Mat identity(int n);
    static Mat zero(int r, int c) { return Mat(r, c); }
};

Mat operator+(const Mat& x, const Mat& y);
Mat operator-(const Mat& x, const Mat& y);
Mat operator*(const Mat& x, const Mat& y);
Mat operator*(double s, const Mat& x);
Mat transpose(const Mat& x);
Vec mat_vec(const Mat& x, const Vec& v);
Mat outer(const Vec& u, const Vec& v);
double dot(const Vec& u, const Vec& v);
double norm2(const Vec& v);
// s^T M s
double quad_form(const Mat& m, const Vec& s);
Mat symmetrize(const Mat& x);
double max_abs_asymmetry(const Mat& x);

// Cholesky factorization of a symmetric positive definite matrix.
// Returns false (leaving `lower` unspecified) if a non-positive pivot shows up.
bool cholesky(const Mat& spd, Mat& lower);
// Solves spd * X = rhs via Cholesky. Throws std::invalid_argument if not SPD.
Mat cholesky_solve(const Mat& spd, const Mat& rhs);
Vec cholesky_solve(const Mat& spd, const Vec& rhs);

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
// ascending. Sweeps run until the off-diagonal Frobenius norm falls below
// 1e-12 relative to the matrix scale.
std::vector<double> jacobi_eigenvalues(const Mat& sym);

} // namespace meglab
