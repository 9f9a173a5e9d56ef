#include "mcf/smallmat.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace mcf::detail {

Mat Mat::identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Vec matvec(const Mat& m, const Vec& x) {
    Vec y(m.rows, 0.0);
    for (int i = 0; i < m.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < m.cols; ++j) s += m(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

Mat matmul(const Mat& a, const Mat& b) {
    Mat c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i)
        for (int k = 0; k < a.cols; ++k) {
            double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

Mat transpose(const Mat& m) {
    Mat t(m.cols, m.rows);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
    return t;
}

Vec least_squares(Mat a, Vec b) {
    const int m = a.rows, n = a.cols;
    if (static_cast<int>(b.size()) != m || m < n)
        throw std::invalid_argument("least_squares: shape mismatch");

    std::vector<int> perm(n);
    for (int j = 0; j < n; ++j) perm[j] = j;

    double max_diag = 0.0;
    int rank = n;
    for (int k = 0; k < n; ++k) {
        // pivot: largest remaining column norm
        int p = k;
        double best = -1.0;
        for (int j = k; j < n; ++j) {
            double s = 0.0;
            for (int i = k; i < m; ++i) s += a(i, j) * a(i, j);
            if (s > best) {
                best = s;
                p = j;
            }
        }
        if (p != k) {
            for (int i = 0; i < m; ++i) std::swap(a(i, p), a(i, k));
            std::swap(perm[p], perm[k]);
        }

        const double norm = std::sqrt(std::max(best, 0.0));
        if (k == 0) max_diag = norm;
        if (norm <= 1e-13 * std::max(1.0, max_diag)) {
            rank = k;
            break;
        }

        // reflector v = x - alpha e1 (normalized), mapping column k to alpha e1
        const double alpha = a(k, k) > 0 ? -norm : norm;
        a(k, k) -= alpha;
        double vnorm = 0.0;
        for (int i = k; i < m; ++i) vnorm += a(i, k) * a(i, k);
        vnorm = std::sqrt(vnorm);
        for (int i = k; i < m; ++i) a(i, k) /= vnorm;

        for (int j = k + 1; j < n; ++j) {
            double s = 0.0;
            for (int i = k; i < m; ++i) s += a(i, k) * a(i, j);
            for (int i = k; i < m; ++i) a(i, j) -= 2.0 * s * a(i, k);
        }
        double s = 0.0;
        for (int i = k; i < m; ++i) s += a(i, k) * b[i];
        for (int i = k; i < m; ++i) b[i] -= 2.0 * s * a(i, k);

        a(k, k) = alpha; // R(k,k)
    }

    // back substitution on the rank x rank upper triangle
    Vec xp(n, 0.0);
    for (int k = rank - 1; k >= 0; --k) {
        double s = b[k];
        for (int j = k + 1; j < rank; ++j) s -= a(k, j) * xp[j];
        xp[k] = s / a(k, k);
    }
    Vec x(n, 0.0);
    for (int j = 0; j < n; ++j) x[perm[j]] = xp[j];
    return x;
}

SymEigen sym_eigen(Mat s) {
    const int n = s.rows;
    if (s.cols != n) throw std::invalid_argument("sym_eigen: not square");
    Mat v = Mat::identity(n);

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += s(p, q) * s(p, q);
        if (off < 1e-30) break;

        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                double apq = s(p, q);
                if (std::abs(apq) < 1e-300) continue;
                double theta = (s(q, q) - s(p, p)) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double sn = t * c;

                for (int i = 0; i < n; ++i) {
                    double sip = s(i, p), siq = s(i, q);
                    s(i, p) = c * sip - sn * siq;
                    s(i, q) = sn * sip + c * siq;
                }
                for (int j = 0; j < n; ++j) {
                    double spj = s(p, j), sqj = s(q, j);
                    s(p, j) = c * spj - sn * sqj;
                    s(q, j) = sn * spj + c * sqj;
                }
                for (int i = 0; i < n; ++i) {
                    double vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - sn * viq;
                    v(i, q) = sn * vip + c * viq;
                }
            }
    }

    // sort ascending
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return s(a, a) < s(b, b); });

    SymEigen out;
    out.values.resize(n);
    out.vectors = Mat(n, n);
    for (int k = 0; k < n; ++k) {
        out.values[k] = s(order[k], order[k]);
        for (int i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

} // namespace mcf::detail
