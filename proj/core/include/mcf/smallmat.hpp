#pragma once

// Dense helpers for the small (N <= a few) systems that show up in the
// constraint projections and the coupled-mobility splitting.  Not meant for
// anything large.

#include <vector>

namespace mcf::detail {

using Vec = std::vector<double>;

struct Mat {
    int rows = 0, cols = 0;
    std::vector<double> a; // row-major

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    static Mat identity(int n);
};

Vec matvec(const Mat& m, const Vec& x);
Mat matmul(const Mat& a, const Mat& b);
Mat transpose(const Mat& m);

// Least-squares solution of A x = b (rows >= cols) by Householder QR with
// column pivoting; rank-deficient systems get the minimum-norm-ish pivoted
// solution (free variables set to zero).  Returns x of length cols.
Vec least_squares(Mat a, Vec b);

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// eigenvalues ascending; vectors(:,k) is the k-th eigenvector (columns).
struct SymEigen {
    Vec values;
    Mat vectors;
};
SymEigen sym_eigen(Mat s);

} // namespace mcf::detail
