#include "clinpred/solvers.hpp"

#include <algorithm>
#include <cmath>

#include "clinpred/error.hpp"

namespace clinpred {

namespace {

double bernoulli_deviance(const std::vector<double>& y, const std::vector<double>& eta,
                          const std::vector<double>& w) {
    double dev = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double p = sigmoid(eta[i]);
        p = std::clamp(p, 1e-15, 1.0 - 1e-15);
        double wi = w.empty() ? 1.0 : w[i];
        dev += -2.0 * wi * (y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p));
    }
    return dev;
}

} // namespace

irls_result irls_logistic(const matrix& x, const std::vector<double>& y, const irls_options& opt) {
    const std::size_t n = x.rows, p = x.cols;
    if (y.size() != n) throw error(errc::invalid_spec, "label length does not match design rows");

    irls_result res;
    res.beta.assign(p, 0.0);
    std::vector<double> eta(n, 0.0);
    auto recompute_eta = [&]() {
        for (std::size_t i = 0; i < n; ++i) {
            double s = opt.offset.empty() ? 0.0 : opt.offset[i];
            for (std::size_t j = 0; j < p; ++j) s += x(i, j) * res.beta[j];
            eta[i] = std::clamp(s, -30.0, 30.0);
        }
    };
    auto penalty = [&]() {
        double s = 0.0;
        for (std::size_t j = 1; j < p; ++j) s += opt.ridge_penalty * res.beta[j] * res.beta[j];
        return s;
    };
    recompute_eta();
    double objective = bernoulli_deviance(y, eta, opt.weights) + penalty();

    matrix xtwx(p, p);
    std::vector<double> rhs(p);
    for (res.iterations = 0; res.iterations < opt.max_iter; ++res.iterations) {
        std::fill(xtwx.a.begin(), xtwx.a.end(), 0.0);
        std::fill(rhs.begin(), rhs.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double mu = sigmoid(eta[i]);
            double wi = (opt.weights.empty() ? 1.0 : opt.weights[i]) * std::max(mu * (1.0 - mu), 1e-10);
            double r = (opt.weights.empty() ? 1.0 : opt.weights[i]) * (y[i] - mu);
            for (std::size_t a1 = 0; a1 < p; ++a1) {
                double xa = x(i, a1);
                rhs[a1] += xa * r;
                for (std::size_t a2 = a1; a2 < p; ++a2) xtwx(a1, a2) += wi * xa * x(i, a2);
            }
        }
        for (std::size_t a1 = 0; a1 < p; ++a1)
            for (std::size_t a2 = 0; a2 < a1; ++a2) xtwx(a1, a2) = xtwx(a2, a1);
        // gradient of penalized log-likelihood; the intercept is never penalized
        double gnorm = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            double gj = rhs[j];
            if (j > 0) gj -= opt.ridge_penalty * res.beta[j];
            gnorm = std::max(gnorm, std::abs(gj));
            rhs[j] = gj;
        }
        res.gradient_norm = gnorm;
        if (opt.ridge_penalty > 0.0)
            for (std::size_t j = 1; j < p; ++j) xtwx(j, j) += opt.ridge_penalty;

        std::vector<double> step = cholesky_solve(xtwx, rhs);
        // step halving keeps the objective monotone near separation
        double scale = 1.0;
        std::vector<double> beta_prev = res.beta;
        double obj_new = objective;
        for (int half = 0; half < 30; ++half) {
            for (std::size_t j = 0; j < p; ++j) res.beta[j] = beta_prev[j] + scale * step[j];
            recompute_eta();
            obj_new = bernoulli_deviance(y, eta, opt.weights) + penalty();
            if (obj_new <= objective + 1e-12) break;
            scale *= 0.5;
        }
        double change = std::abs(objective - obj_new);
        objective = obj_new;
        if (change < opt.tol) {
            res.converged = true;
            ++res.iterations;
            break;
        }
    }
    res.deviance = bernoulli_deviance(y, eta, opt.weights);
    if (!res.converged) res.separation_warning = true; // iteration cap: keep finite coefficients
    // refresh the reported gradient at the returned solution
    {
        std::vector<double> grad(p, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double mu = sigmoid(eta[i]);
            double r = (opt.weights.empty() ? 1.0 : opt.weights[i]) * (y[i] - mu);
            for (std::size_t j = 0; j < p; ++j) grad[j] += x(i, j) * r;
        }
        double gnorm = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            if (j > 0) grad[j] -= opt.ridge_penalty * res.beta[j];
            gnorm = std::max(gnorm, std::abs(grad[j]));
        }
        res.gradient_norm = gnorm;
    }
    return res;
}

elastic_net_result elastic_net_solve(const matrix& x, const std::vector<double>& y, double lambda,
                                     double alpha, const elastic_net_options& opt) {
    if (lambda < 0.0) throw error(errc::invalid_spec, "lambda must be >= 0");
    if (alpha < 0.0 || alpha > 1.0) throw error(errc::invalid_spec, "alpha must be in [0,1]");
    const std::size_t n = x.rows, p = x.cols;

    elastic_net_result res;
    res.beta = opt.warm_start.size() == p ? opt.warm_start : std::vector<double>(p, 0.0);

    std::vector<double> col_norm2(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x(i, j) * x(i, j);
        col_norm2[j] = s;
    }
    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = y[i];
        for (std::size_t j = 0; j < p; ++j) s -= x(i, j) * res.beta[j];
        resid[i] = s;
    }

    const double l1 = lambda * alpha;
    const double l2 = lambda * (1.0 - alpha);
    for (res.sweeps = 0; res.sweeps < opt.max_sweeps; ++res.sweeps) {
        double max_change = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            if (col_norm2[j] == 0.0) continue;
            double bj = res.beta[j];
            double rho = 0.0;
            for (std::size_t i = 0; i < n; ++i) rho += x(i, j) * resid[i];
            rho += col_norm2[j] * bj;
            double bnew = 0.0;
            if (rho > l1) bnew = (rho - l1) / (col_norm2[j] + l2);
            else if (rho < -l1) bnew = (rho + l1) / (col_norm2[j] + l2);
            double diff = bnew - bj;
            if (diff != 0.0) {
                for (std::size_t i = 0; i < n; ++i) resid[i] -= x(i, j) * diff;
                res.beta[j] = bnew;
            }
            max_change = std::max(max_change, std::abs(diff));
        }
        if (max_change < opt.tol) {
            res.converged = true;
            ++res.sweeps;
            break;
        }
    }
    if (!res.converged)
        throw error(errc::non_convergence,
                    "coordinate descent hit " + std::to_string(opt.max_sweeps) + " sweeps");
    return res;
}

double elastic_net_lambda_max(const matrix& x, const std::vector<double>& y, double alpha) {
    double a = std::max(alpha, 0.001);
    double m = 0.0;
    for (std::size_t j = 0; j < x.cols; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.rows; ++i) s += x(i, j) * y[i];
        m = std::max(m, std::abs(s));
    }
    return m / a;
}

least_squares_result solve_least_squares(const matrix& x, const std::vector<double>& y,
                                         const std::vector<double>& weights) {
    least_squares_result res;
    if (weights.empty()) {
        res.beta = qr_least_squares(x, y, &res.jittered);
        return res;
    }
    matrix xw = x;
    std::vector<double> yw = y;
    for (std::size_t i = 0; i < x.rows; ++i) {
        double w = std::sqrt(std::max(weights[i], 0.0));
        for (std::size_t j = 0; j < x.cols; ++j) xw(i, j) *= w;
        yw[i] *= w;
    }
    res.beta = qr_least_squares(xw, yw, &res.jittered);
    return res;
}

} // namespace clinpred
