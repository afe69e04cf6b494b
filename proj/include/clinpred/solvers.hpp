#pragma once

#include <cmath>
#include <vector>

#include "clinpred/linalg.hpp"

namespace clinpred {

struct irls_options {
    double ridge_penalty = 0.0;   // applied to every coefficient except column 0 (intercept)
    std::vector<double> weights;  // per-row, empty = all ones
    std::vector<double> offset;   // fixed linear-predictor offset, empty = none
    double tol = 1e-8;            // deviance change
    int max_iter = 100;
};

struct irls_result {
    std::vector<double> beta;
    bool converged = false;
    int iterations = 0;
    double deviance = 0.0;
    double gradient_norm = 0.0; // max-norm of the penalized log-likelihood gradient
    bool separation_warning = false;
};

// Penalized Bernoulli maximum likelihood by iteratively reweighted least
// squares. X must carry its own intercept column when one is wanted.
irls_result irls_logistic(const matrix& x, const std::vector<double>& y, const irls_options& opt = {});

struct elastic_net_options {
    double tol = 1e-7;     // max coefficient change per sweep
    int max_sweeps = 10000;
    std::vector<double> warm_start;
};

struct elastic_net_result {
    std::vector<double> beta;
    bool converged = false;
    int sweeps = 0;
};

// Cyclic coordinate descent for 0.5*||y - X b||^2 + lambda*(alpha*||b||_1 +
// (1-alpha)/2*||b||^2). Callers standardize columns and center y; the
// intercept is recovered outside.
elastic_net_result elastic_net_solve(const matrix& x, const std::vector<double>& y, double lambda,
                                     double alpha, const elastic_net_options& opt = {});

// Smallest lambda that zeroes every coefficient (alpha floored at 0.001 so
// the ridge end of the grid stays finite).
double elastic_net_lambda_max(const matrix& x, const std::vector<double>& y, double alpha);

struct least_squares_result {
    std::vector<double> beta;
    bool jittered = false;
};

// Weighted linear least squares through Householder QR; singular designs are
// retried with a small ridge and flagged.
least_squares_result solve_least_squares(const matrix& x, const std::vector<double>& y,
                                         const std::vector<double>& weights = {});

inline double sigmoid(double z) {
    if (z >= 0) {
        double e = std::exp(-z);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(z);
    return e / (1.0 + e);
}

} // namespace clinpred
