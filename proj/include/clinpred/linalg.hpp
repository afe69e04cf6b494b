#pragma once

#include <cstddef>
#include <vector>

namespace clinpred {

// Dense row-major matrix. Small sizes only (p is the feature count, tens at
// most); everything here is written for clarity over asymptotics.
struct matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    matrix() = default;
    matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
};

matrix transpose(const matrix& m);
matrix matmul(const matrix& x, const matrix& y);
std::vector<double> matvec(const matrix& m, const std::vector<double>& v);

// Solves A x = b for symmetric positive definite A by Cholesky. If the
// factorization breaks down, retries once with `jitter` added to the
// diagonal; throws SingularSystem if that fails too. Sets *jittered when a
// retry was needed.
std::vector<double> cholesky_solve(matrix a, std::vector<double> b, double jitter = 1e-8,
                                   bool* jittered = nullptr);

// Least squares via Householder QR. Near-zero diagonal of R triggers a
// ridge-jittered normal-equation fallback (flagged through *jittered).
std::vector<double> qr_least_squares(const matrix& x, const std::vector<double>& y,
                                     bool* jittered = nullptr);

// Eigendecomposition of a symmetric matrix by the cyclic Jacobi method.
// Eigenpairs are returned sorted by descending eigenvalue; vectors[.] are the
// columns of the rotation.
struct eigen_result {
    std::vector<double> values;
    matrix vectors; // column j = eigenvector for values[j]
};
eigen_result jacobi_eigen(matrix a, double tol = 1e-13, int max_sweeps = 64);

} // namespace clinpred
