#include "clinpred/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "clinpred/error.hpp"

namespace clinpred {

matrix transpose(const matrix& m) {
    matrix t(m.cols, m.rows);
    for (std::size_t r = 0; r < m.rows; ++r)
        for (std::size_t c = 0; c < m.cols; ++c) t(c, r) = m(r, c);
    return t;
}

matrix matmul(const matrix& x, const matrix& y) {
    matrix out(x.rows, y.cols, 0.0);
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t k = 0; k < x.cols; ++k) {
            double v = x(i, k);
            if (v == 0.0) continue;
            for (std::size_t j = 0; j < y.cols; ++j) out(i, j) += v * y(k, j);
        }
    }
    return out;
}

std::vector<double> matvec(const matrix& m, const std::vector<double>& v) {
    std::vector<double> out(m.rows, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < m.cols; ++c) s += m(r, c) * v[c];
        out[r] = s;
    }
    return out;
}

namespace {

// In-place Cholesky, lower triangle. Returns false on a non-positive pivot.
bool cholesky_factor(matrix& a) {
    const std::size_t n = a.rows;
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        d = std::sqrt(d);
        a(j, j) = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            a(i, j) = s / d;
        }
    }
    return true;
}

std::vector<double> cholesky_back_substitute(const matrix& l, std::vector<double> b) {
    const std::size_t n = l.rows;
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * b[k];
        b[i] = s / l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * b[k];
        b[ii] = s / l(ii, ii);
    }
    return b;
}

} // namespace

std::vector<double> cholesky_solve(matrix a, std::vector<double> b, double jitter, bool* jittered) {
    if (jittered) *jittered = false;
    matrix f = a;
    if (cholesky_factor(f)) return cholesky_back_substitute(f, std::move(b));
    // jitter retry: scale to the diagonal magnitude so it works at any scale
    double dmax = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i) dmax = std::max(dmax, std::abs(a(i, i)));
    double eps = jitter * std::max(1.0, dmax);
    for (std::size_t i = 0; i < a.rows; ++i) a(i, i) += eps;
    if (!cholesky_factor(a)) throw error(errc::singular_system, "matrix not positive definite after jitter");
    if (jittered) *jittered = true;
    return cholesky_back_substitute(a, std::move(b));
}

std::vector<double> qr_least_squares(const matrix& x, const std::vector<double>& y, bool* jittered) {
    if (jittered) *jittered = false;
    const std::size_t n = x.rows, p = x.cols;
    matrix r = x;
    std::vector<double> qty = y;
    // Householder reflections applied column by column to [X | y].
    for (std::size_t j = 0; j < p && j < n; ++j) {
        double norm = 0.0;
        for (std::size_t i = j; i < n; ++i) norm += r(i, j) * r(i, j);
        norm = std::sqrt(norm);
        if (norm == 0.0) continue;
        double alpha = r(j, j) > 0 ? -norm : norm;
        std::vector<double> v(n - j, 0.0);
        v[0] = r(j, j) - alpha;
        for (std::size_t i = j + 1; i < n; ++i) v[i - j] = r(i, j);
        double vnorm2 = 0.0;
        for (double t : v) vnorm2 += t * t;
        if (vnorm2 == 0.0) continue;
        for (std::size_t c = j; c < p; ++c) {
            double dot = 0.0;
            for (std::size_t i = j; i < n; ++i) dot += v[i - j] * r(i, c);
            double f = 2.0 * dot / vnorm2;
            for (std::size_t i = j; i < n; ++i) r(i, c) -= f * v[i - j];
        }
        double dot = 0.0;
        for (std::size_t i = j; i < n; ++i) dot += v[i - j] * qty[i];
        double f = 2.0 * dot / vnorm2;
        for (std::size_t i = j; i < n; ++i) qty[i] -= f * v[i - j];
    }
    // detect rank deficiency from R's diagonal
    double rmax = 0.0;
    for (std::size_t j = 0; j < p && j < n; ++j) rmax = std::max(rmax, std::abs(r(j, j)));
    bool deficient = (n < p);
    for (std::size_t j = 0; j < p && j < n; ++j)
        if (std::abs(r(j, j)) <= 1e-12 * std::max(1.0, rmax)) deficient = true;

    if (deficient) {
        // ridge-jittered normal equations keep the solve well defined
        matrix xtx(p, p, 0.0);
        std::vector<double> xty(p, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t a1 = 0; a1 < p; ++a1) {
                xty[a1] += x(i, a1) * y[i];
                for (std::size_t a2 = a1; a2 < p; ++a2) xtx(a1, a2) += x(i, a1) * x(i, a2);
            }
        }
        for (std::size_t a1 = 0; a1 < p; ++a1)
            for (std::size_t a2 = 0; a2 < a1; ++a2) xtx(a1, a2) = xtx(a2, a1);
        double dmax = 0.0;
        for (std::size_t i = 0; i < p; ++i) dmax = std::max(dmax, xtx(i, i));
        for (std::size_t i = 0; i < p; ++i) xtx(i, i) += 1e-8 * std::max(1.0, dmax);
        if (jittered) *jittered = true;
        return cholesky_solve(std::move(xtx), std::move(xty));
    }

    std::vector<double> beta(p, 0.0);
    for (std::size_t jj = p; jj-- > 0;) {
        double s = qty[jj];
        for (std::size_t k = jj + 1; k < p; ++k) s -= r(jj, k) * beta[k];
        beta[jj] = s / r(jj, jj);
    }
    return beta;
}

eigen_result jacobi_eigen(matrix a, double tol, int max_sweeps) {
    const std::size_t n = a.rows;
    matrix v(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < tol * tol) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return diag[l] > diag[r]; });

    eigen_result res;
    res.values.resize(n);
    res.vectors = matrix(n, n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        res.values[j] = diag[order[j]];
        for (std::size_t i = 0; i < n; ++i) res.vectors(i, j) = v(i, order[j]);
    }
    return res;
}

} // namespace clinpred
