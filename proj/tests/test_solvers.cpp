#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "clinpred/error.hpp"
#include "clinpred/linalg.hpp"
#include "clinpred/rng.hpp"
#include "clinpred/solvers.hpp"

using namespace clinpred;

namespace {

// Batch gradient ascent on the Bernoulli log-likelihood with adaptive step.
// Slow but independent of the IRLS path; used as the solver oracle.
std::vector<double> gradient_descent_logistic(const matrix& x, const std::vector<double>& y,
                                              int max_iter = 400000) {
    const std::size_t n = x.rows, p = x.cols;
    std::vector<double> beta(p, 0.0), grad(p);
    double lr = 1.0 / static_cast<double>(n);
    auto log_lik = [&](const std::vector<double>& b) {
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double eta = 0.0;
            for (std::size_t j = 0; j < p; ++j) eta += x(i, j) * b[j];
            double pr = std::clamp(sigmoid(eta), 1e-15, 1.0 - 1e-15);
            ll += y[i] * std::log(pr) + (1.0 - y[i]) * std::log(1.0 - pr);
        }
        return ll;
    };
    double ll = log_lik(beta);
    for (int it = 0; it < max_iter; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double eta = 0.0;
            for (std::size_t j = 0; j < p; ++j) eta += x(i, j) * beta[j];
            double r = y[i] - sigmoid(eta);
            for (std::size_t j = 0; j < p; ++j) grad[j] += x(i, j) * r;
        }
        double gnorm = 0.0;
        for (double g : grad) gnorm = std::max(gnorm, std::abs(g));
        if (gnorm < 1e-10) break;
        std::vector<double> trial(p);
        for (std::size_t j = 0; j < p; ++j) trial[j] = beta[j] + lr * grad[j];
        double ll_new = log_lik(trial);
        if (ll_new > ll) {
            beta = std::move(trial);
            ll = ll_new;
            lr *= 1.05;
        } else {
            lr *= 0.5;
        }
    }
    return beta;
}

matrix random_design(rng& g, std::size_t n, std::size_t p, bool intercept) {
    matrix x(n, p + (intercept ? 1 : 0));
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j0 = 0;
        if (intercept) {
            x(i, 0) = 1.0;
            j0 = 1;
        }
        for (std::size_t j = j0; j < x.cols; ++j) x(i, j) = g.normal();
    }
    return x;
}

} // namespace

TEST_CASE("intercept-only logistic recovers logit of the base rate") {
    matrix x(4, 1, 1.0);
    std::vector<double> y = {1, 0, 0, 0};
    irls_result fit = irls_logistic(x, y);
    CHECK(fit.converged);
    CHECK(fit.beta[0] == doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-8));
}

TEST_CASE("irls gradient vanishes at the solution") {
    rng g(5);
    matrix x = random_design(g, 300, 3, true);
    std::vector<double> y(300);
    for (std::size_t i = 0; i < 300; ++i)
        y[i] = g.uniform() < sigmoid(0.3 + 0.8 * x(i, 1) - 0.5 * x(i, 2)) ? 1.0 : 0.0;
    irls_result fit = irls_logistic(x, y);
    CHECK(fit.converged);
    CHECK(fit.gradient_norm < 1e-6);
}

TEST_CASE("irls matches the gradient-descent oracle on a 200x3 instance") {
    rng g(17);
    matrix x = random_design(g, 200, 3, true); // intercept + 3 covariates
    std::vector<double> y(200);
    for (std::size_t i = 0; i < 200; ++i) {
        double eta = 0.2 + 0.9 * x(i, 1) - 0.7 * x(i, 2) + 0.4 * x(i, 3);
        y[i] = g.uniform() < sigmoid(eta) ? 1.0 : 0.0;
    }
    irls_result fit = irls_logistic(x, y);
    std::vector<double> oracle = gradient_descent_logistic(x, y);
    for (std::size_t j = 0; j < fit.beta.size(); ++j)
        CHECK(fit.beta[j] == doctest::Approx(oracle[j]).epsilon(1e-4).scale(1.0));
}

TEST_CASE("irls flags complete separation instead of failing") {
    matrix x(6, 2);
    std::vector<double> y(6);
    for (int i = 0; i < 6; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = i < 3 ? -1.0 - i : 1.0 + i;
        y[i] = i < 3 ? 0.0 : 1.0;
    }
    irls_result fit = irls_logistic(x, y);
    CHECK(fit.separation_warning == !fit.converged);
    for (double b : fit.beta) CHECK(std::isfinite(b));
}

TEST_CASE("irls honors per-row weights") {
    // weighting a row by 2 equals duplicating it
    matrix x(3, 1, 1.0);
    std::vector<double> y = {1, 0, 0};
    irls_options opt;
    opt.weights = {2.0, 1.0, 1.0};
    irls_result weighted = irls_logistic(x, y, opt);
    CHECK(weighted.beta[0] == doctest::Approx(std::log(2.0 / 2.0)).epsilon(1e-7));
}

TEST_CASE("irls offset supports pinned-slope refits") {
    rng g(23);
    std::vector<double> offset(500), y(500);
    for (std::size_t i = 0; i < 500; ++i) {
        offset[i] = g.normal();
        y[i] = g.uniform() < sigmoid(offset[i] + 0.8) ? 1.0 : 0.0;
    }
    matrix x(500, 1, 1.0);
    irls_options opt;
    opt.offset = offset;
    irls_result fit = irls_logistic(x, y, opt);
    CHECK(fit.beta[0] == doctest::Approx(0.8).epsilon(0.25));
}

TEST_CASE("elastic net on orthonormal designs matches closed forms") {
    // orthonormal columns: identity-style design
    const std::size_t n = 8, p = 4;
    matrix x(n, p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        x(j, j) = 1.0 / std::sqrt(2.0);
        x(j + p, j) = -1.0 / std::sqrt(2.0);
    }
    rng g(31);
    std::vector<double> y(n);
    for (auto& v : y) v = g.normal() * 2.0;

    // OLS on orthonormal columns: b_j = <x_j, y>
    std::vector<double> b(p, 0.0);
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t i = 0; i < n; ++i) b[j] += x(i, j) * y[i];

    double lambda = 0.7;
    SUBCASE("alpha=1 soft-thresholds the OLS solution") {
        auto fit = elastic_net_solve(x, y, lambda, 1.0);
        for (std::size_t j = 0; j < p; ++j) {
            double expect = std::abs(b[j]) > lambda ? (b[j] > 0 ? b[j] - lambda : b[j] + lambda) : 0.0;
            CHECK(fit.beta[j] == doctest::Approx(expect).epsilon(1e-6).scale(1.0));
        }
    }
    SUBCASE("alpha=0 shrinks by 1/(1+lambda)") {
        auto fit = elastic_net_solve(x, y, lambda, 0.0);
        for (std::size_t j = 0; j < p; ++j)
            CHECK(fit.beta[j] == doctest::Approx(b[j] / (1.0 + lambda)).epsilon(1e-6).scale(1.0));
    }
    SUBCASE("lambda=0 reproduces OLS") {
        auto fit = elastic_net_solve(x, y, 0.0, 0.5);
        for (std::size_t j = 0; j < p; ++j)
            CHECK(fit.beta[j] == doctest::Approx(b[j]).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("elastic net subgradient conditions hold on a random design") {
    rng g(41);
    const std::size_t n = 60, p = 6;
    matrix x = random_design(g, n, p, false);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = 1.5 * x(i, 0) - 2.0 * x(i, 2) + 0.3 * g.normal();
    double lambda = 3.0, alpha = 0.6;
    auto fit = elastic_net_solve(x, y, lambda, alpha);
    // KKT: |x_j' r - lambda(1-alpha) b_j| <= lambda*alpha, equality with sign for active b_j
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = y[i];
        for (std::size_t j = 0; j < p; ++j) r[i] -= x(i, j) * fit.beta[j];
    }
    for (std::size_t j = 0; j < p; ++j) {
        double xr = 0.0;
        for (std::size_t i = 0; i < n; ++i) xr += x(i, j) * r[i];
        double sub = xr - lambda * (1.0 - alpha) * fit.beta[j];
        if (fit.beta[j] == 0.0) {
            CHECK(std::abs(sub) <= lambda * alpha + 1e-6);
        } else {
            CHECK(sub == doctest::Approx(lambda * alpha * (fit.beta[j] > 0 ? 1.0 : -1.0)).epsilon(1e-5));
        }
    }
}

TEST_CASE("lambda_max zeroes every coefficient") {
    rng g(43);
    matrix x = random_design(g, 50, 5, false);
    std::vector<double> y(50);
    for (auto& v : y) v = g.normal();
    double lmax = elastic_net_lambda_max(x, y, 1.0);
    auto fit = elastic_net_solve(x, y, lmax * 1.0000001, 1.0);
    for (double bj : fit.beta) CHECK(bj == 0.0);
}

TEST_CASE("least squares residuals are orthogonal to the design") {
    rng g(53);
    matrix x = random_design(g, 120, 4, true);
    std::vector<double> y(120);
    for (std::size_t i = 0; i < 120; ++i) y[i] = 2.0 + x(i, 1) - 3.0 * x(i, 3) + g.normal();
    auto fit = solve_least_squares(x, y);
    CHECK(!fit.jittered);
    for (std::size_t j = 0; j < x.cols; ++j) {
        double dot = 0.0;
        for (std::size_t i = 0; i < 120; ++i) {
            double pred = 0.0;
            for (std::size_t c = 0; c < x.cols; ++c) pred += x(i, c) * fit.beta[c];
            dot += x(i, j) * (y[i] - pred);
        }
        CHECK(std::abs(dot) < 1e-8);
    }
}

TEST_CASE("singular designs fall back to jittered solve with a flag") {
    matrix x(10, 3);
    rng g(61);
    for (std::size_t i = 0; i < 10; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = g.normal();
        x(i, 2) = 2.0 * x(i, 1); // exact collinearity
    }
    std::vector<double> y(10);
    for (auto& v : y) v = g.normal();
    auto fit = solve_least_squares(x, y);
    CHECK(fit.jittered);
    for (double b : fit.beta) CHECK(std::isfinite(b));
}

TEST_CASE("jacobi eigensolver diagonalizes a known matrix") {
    matrix m(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    m(0, 1) = m(1, 0) = 1.0; // eigenvalues 2 and 0
    eigen_result eig = jacobi_eigen(m);
    CHECK(eig.values[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(eig.values[1] == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
    CHECK(std::abs(eig.vectors(0, 0)) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
}
