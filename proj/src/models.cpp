#include "clinpred/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "clinpred/error.hpp"
#include "clinpred/parallel.hpp"
#include "clinpred/rng.hpp"
#include "clinpred/solvers.hpp"

namespace clinpred {

const char* algorithm_name(algorithm a) {
    switch (a) {
        case algorithm::glm_logistic: return "glm";
        case algorithm::glm_linear: return "lm";
        case algorithm::ridge: return "ridge";
        case algorithm::lasso: return "lasso";
        case algorithm::elastic_net: return "enet";
        case algorithm::naive_bayes: return "nb";
        case algorithm::knn: return "knn";
        case algorithm::random_forest: return "rf";
        case algorithm::gbm: return "gbm";
    }
    return "?";
}

algorithm algorithm_from_name(const std::string& name) {
    if (name == "glm") return algorithm::glm_logistic;
    if (name == "lm") return algorithm::glm_linear;
    if (name == "ridge") return algorithm::ridge;
    if (name == "lasso") return algorithm::lasso;
    if (name == "enet") return algorithm::elastic_net;
    if (name == "nb") return algorithm::naive_bayes;
    if (name == "knn") return algorithm::knn;
    if (name == "rf") return algorithm::random_forest;
    if (name == "gbm") return algorithm::gbm;
    throw error(errc::config_error, "unknown algorithm '" + name + "'");
}

int algorithm_simplicity_rank(algorithm a) {
    switch (a) {
        case algorithm::glm_logistic:
        case algorithm::glm_linear: return 0;
        case algorithm::ridge:
        case algorithm::lasso:
        case algorithm::elastic_net: return 1;
        case algorithm::naive_bayes: return 2;
        case algorithm::knn: return 3;
        case algorithm::random_forest: return 4;
        case algorithm::gbm: return 5;
    }
    return 6;
}

bool algorithm_supports(algorithm a, endpoint_mode mode) {
    switch (a) {
        case algorithm::glm_logistic:
        case algorithm::naive_bayes:
        case algorithm::gbm: return mode == endpoint_mode::classification;
        case algorithm::glm_linear:
        case algorithm::lasso:
        case algorithm::elastic_net: return mode == endpoint_mode::regression;
        case algorithm::ridge:
        case algorithm::knn:
        case algorithm::random_forest: return true;
    }
    return false;
}

std::string hyper_point::describe(algorithm a) const {
    char buf[160];
    switch (a) {
        case algorithm::glm_logistic:
        case algorithm::glm_linear:
            return "default";
        case algorithm::ridge:
            std::snprintf(buf, sizeof buf, "lambda=%g", lambda);
            return buf;
        case algorithm::lasso:
            std::snprintf(buf, sizeof buf, "lambda=%g", lambda);
            return buf;
        case algorithm::elastic_net:
            std::snprintf(buf, sizeof buf, "lambda=%g alpha=%g", lambda, alpha);
            return buf;
        case algorithm::naive_bayes:
            std::snprintf(buf, sizeof buf, "fL=%g usekernel=%s adjust=%g", laplace,
                          use_kernel ? "true" : "false", adjust);
            return buf;
        case algorithm::knn:
            std::snprintf(buf, sizeof buf, "k=%zu", k);
            return buf;
        case algorithm::random_forest:
            std::snprintf(buf, sizeof buf, "mtry=%zu trees=%zu", mtry, n_trees);
            return buf;
        case algorithm::gbm:
            std::snprintf(buf, sizeof buf, "trees=%zu depth=%d shrinkage=%g min_obs=%zu", n_trees,
                          depth, shrinkage, min_obs);
            return buf;
    }
    return "?";
}

estimator_spec estimator_spec::with_defaults(algorithm a) {
    estimator_spec s;
    s.algo = a;
    return s;
}

void validate_hyper(algorithm a, const hyper_point& h, std::size_t p) {
    switch (a) {
        case algorithm::ridge:
        case algorithm::lasso:
            if (h.lambda < 0.0) throw error(errc::config_error, "lambda must be >= 0");
            break;
        case algorithm::elastic_net:
            if (h.lambda < 0.0) throw error(errc::config_error, "lambda must be >= 0");
            if (h.alpha < 0.0 || h.alpha > 1.0) throw error(errc::config_error, "alpha must be in [0,1]");
            break;
        case algorithm::random_forest:
            if (h.n_trees < 1) throw error(errc::config_error, "need at least one tree");
            if (h.mtry > p) throw error(errc::config_error, "mtry exceeds feature count");
            break;
        case algorithm::gbm:
            if (h.n_trees < 1) throw error(errc::config_error, "need at least one tree");
            if (!(h.shrinkage > 0.0 && h.shrinkage <= 1.0))
                throw error(errc::config_error, "shrinkage must be in (0,1]");
            if (h.depth < 0) throw error(errc::config_error, "depth must be >= 0");
            if (h.min_obs < 1) throw error(errc::config_error, "min_obs must be >= 1");
            break;
        case algorithm::naive_bayes:
            if (h.laplace < 0.0) throw error(errc::config_error, "fL must be >= 0");
            if (!(h.adjust > 0.0)) throw error(errc::config_error, "adjust must be > 0");
            break;
        case algorithm::knn:
            if (h.k < 1) throw error(errc::config_error, "k must be >= 1");
            break;
        default:
            break;
    }
}

// --- Design helpers -------------------------------------------------------------------

namespace {

struct design_view {
    matrix x;
    std::vector<double> y;
    std::vector<std::string> names;
    std::vector<std::uint8_t> is_continuous;
    std::vector<std::vector<int>> levels;
    bool has_outcome = false;
};

design_view make_design(const dataset& ds) {
    design_view d;
    auto cols = ds.feature_columns();
    d.x = matrix(ds.n_rows, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        const auto& sp = ds.specs[cols[j]];
        d.names.push_back(sp.name);
        d.is_continuous.push_back(sp.kind == feature_kind::continuous ? 1 : 0);
        if (sp.kind == feature_kind::binary) d.levels.push_back({0, 1});
        else d.levels.push_back(sp.levels);
        for (std::size_t r = 0; r < ds.n_rows; ++r) d.x(r, j) = ds.at(r, cols[j]);
    }
    int oc = ds.outcome_index();
    if (oc >= 0) {
        d.has_outcome = true;
        d.y.resize(ds.n_rows);
        for (std::size_t r = 0; r < ds.n_rows; ++r) d.y[r] = ds.at(r, static_cast<std::size_t>(oc));
    }
    return d;
}

matrix with_intercept(const matrix& x) {
    matrix out(x.rows, x.cols + 1);
    for (std::size_t r = 0; r < x.rows; ++r) {
        out(r, 0) = 1.0;
        for (std::size_t c = 0; c < x.cols; ++c) out(r, c + 1) = x(r, c);
    }
    return out;
}

// Penalized regression solved on the internally standardized design; the
// returned beta is on the original scale with the intercept recovered from
// the centering identities.
linear_params fit_penalized_regression(const matrix& x, const std::vector<double>& y, double lambda,
                                       double alpha, const std::vector<double>& warm = {}) {
    const std::size_t n = x.rows, p = x.cols;
    std::vector<double> mean(p, 0.0), sd(p, 1.0);
    for (std::size_t j = 0; j < p; ++j) {
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s += x(i, j);
            s2 += x(i, j) * x(i, j);
        }
        mean[j] = s / static_cast<double>(n);
        double var = n > 1 ? std::max(0.0, (s2 - s * mean[j]) / static_cast<double>(n - 1)) : 0.0;
        sd[j] = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    double ymean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);

    matrix xs(n, p);
    std::vector<double> yc(n);
    for (std::size_t i = 0; i < n; ++i) {
        yc[i] = y[i] - ymean;
        for (std::size_t j = 0; j < p; ++j) xs(i, j) = (x(i, j) - mean[j]) / sd[j];
    }
    elastic_net_options opt;
    opt.warm_start = warm;
    elastic_net_result fit = elastic_net_solve(xs, yc, lambda, alpha, opt);

    linear_params lp;
    lp.logistic = false;
    lp.beta.assign(p + 1, 0.0);
    double icpt = ymean;
    for (std::size_t j = 0; j < p; ++j) {
        double bj = fit.beta[j] / sd[j];
        lp.beta[j + 1] = bj;
        icpt -= bj * mean[j];
    }
    lp.beta[0] = icpt;
    return lp;
}

// --- Naive Bayes -----------------------------------------------------------------------

// Silverman's rule-of-thumb bandwidth scaled by the adjust hyperparameter.
double silverman_bandwidth(const std::vector<double>& sorted_values, double adjust) {
    const std::size_t n = sorted_values.size();
    if (n < 2) return std::max(adjust, 1e-6);
    double s = 0.0, s2 = 0.0;
    for (double v : sorted_values) {
        s += v;
        s2 += v * v;
    }
    double mean = s / static_cast<double>(n);
    double var = std::max(0.0, (s2 - s * mean) / static_cast<double>(n - 1));
    double sd = std::sqrt(var);
    double q1 = sorted_values[static_cast<std::size_t>(0.25 * static_cast<double>(n - 1))];
    double q3 = sorted_values[static_cast<std::size_t>(0.75 * static_cast<double>(n - 1))];
    double spread = std::min(sd, (q3 - q1) / 1.34);
    if (spread <= 0.0) spread = sd > 0.0 ? sd : 1.0;
    double h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
    return std::max(h * adjust, 1e-6);
}

double gaussian_log_pdf(double x, double mean, double sd) {
    double var = std::max(sd * sd, 1e-9);
    double d = x - mean;
    return -0.5 * std::log(6.283185307179586 * var) - d * d / (2.0 * var);
}

// Gaussian KDE on a sorted sample, kernel truncated at six bandwidths.
double kde_log_density(const std::vector<double>& sorted_values, double h, double x) {
    const double window = 6.0 * h;
    auto lo = std::lower_bound(sorted_values.begin(), sorted_values.end(), x - window);
    auto hi = std::upper_bound(sorted_values.begin(), sorted_values.end(), x + window);
    double sum = 0.0;
    for (auto it = lo; it != hi; ++it) {
        double u = (x - *it) / h;
        sum += std::exp(-0.5 * u * u);
    }
    double density = sum / (static_cast<double>(sorted_values.size()) * h * 2.5066282746310002);
    return std::log(std::max(density, 1e-300));
}

nb_params fit_naive_bayes(const design_view& d, const std::vector<double>& w, const hyper_point& h) {
    const std::size_t n = d.x.rows, p = d.x.cols;
    nb_params nb;
    nb.use_kernel = h.use_kernel;

    double wsum[2] = {0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        double wi = w.empty() ? 1.0 : w[i];
        wsum[d.y[i] == 1.0 ? 1 : 0] += wi;
    }
    double total = wsum[0] + wsum[1];
    if (wsum[0] <= 0.0 || wsum[1] <= 0.0) throw error(errc::single_class, "naive Bayes needs both classes");
    nb.prior[0] = wsum[0] / total;
    nb.prior[1] = wsum[1] / total;

    nb.features.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        nb_feature& f = nb.features[j];
        f.continuous = d.is_continuous[j] != 0;
        if (f.continuous) {
            for (int cls = 0; cls < 2; ++cls) {
                double s = 0.0, s2 = 0.0, sw = 0.0;
                std::vector<double> vals;
                for (std::size_t i = 0; i < n; ++i) {
                    if ((d.y[i] == 1.0 ? 1 : 0) != cls) continue;
                    double wi = w.empty() ? 1.0 : w[i];
                    s += wi * d.x(i, j);
                    s2 += wi * d.x(i, j) * d.x(i, j);
                    sw += wi;
                    vals.push_back(d.x(i, j));
                }
                double mean = sw > 0 ? s / sw : 0.0;
                double var = sw > 0 ? std::max(s2 / sw - mean * mean, 1e-9) : 1e-9;
                f.mean[cls] = mean;
                f.sd[cls] = std::sqrt(var);
                if (nb.use_kernel) {
                    std::sort(vals.begin(), vals.end());
                    f.bandwidth[cls] = silverman_bandwidth(vals, h.adjust);
                    f.kernel_values[cls] = std::move(vals);
                }
            }
        } else {
            f.levels = d.levels[j];
            if (f.levels.empty()) f.levels = {0, 1};
            double n_levels = static_cast<double>(f.levels.size());
            for (int cls = 0; cls < 2; ++cls) {
                std::vector<double> counts(f.levels.size(), 0.0);
                double sw = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if ((d.y[i] == 1.0 ? 1 : 0) != cls) continue;
                    double wi = w.empty() ? 1.0 : w[i];
                    sw += wi;
                    auto it = std::find(f.levels.begin(), f.levels.end(), static_cast<int>(d.x(i, j)));
                    if (it != f.levels.end()) counts[static_cast<std::size_t>(it - f.levels.begin())] += wi;
                }
                f.level_log_prob[cls].resize(f.levels.size());
                for (std::size_t l = 0; l < f.levels.size(); ++l) {
                    double prob = (counts[l] + h.laplace) / (sw + h.laplace * n_levels);
                    f.level_log_prob[cls][l] = prob > 0.0 ? std::log(prob) : -1e300;
                }
            }
        }
    }
    return nb;
}

double nb_posterior_positive(const nb_params& nb, const matrix& x, std::size_t row) {
    double lp[2] = {std::log(nb.prior[0]), std::log(nb.prior[1])};
    for (std::size_t j = 0; j < nb.features.size(); ++j) {
        const nb_feature& f = nb.features[j];
        double v = x(row, j);
        for (int cls = 0; cls < 2; ++cls) {
            if (f.continuous) {
                lp[cls] += nb.use_kernel && !f.kernel_values[cls].empty()
                               ? kde_log_density(f.kernel_values[cls], f.bandwidth[cls], v)
                               : gaussian_log_pdf(v, f.mean[cls], f.sd[cls]);
            } else {
                auto it = std::find(f.levels.begin(), f.levels.end(), static_cast<int>(v));
                if (it == f.levels.end()) continue; // level unknown to the model: uninformative
                lp[cls] += f.level_log_prob[cls][static_cast<std::size_t>(it - f.levels.begin())];
            }
        }
    }
    double m = std::max(lp[0], lp[1]);
    if (!std::isfinite(m)) return nb.prior[1];
    double e0 = std::exp(lp[0] - m), e1 = std::exp(lp[1] - m);
    return e1 / (e0 + e1);
}

// --- kNN --------------------------------------------------------------------------------

knn_params fit_knn(const design_view& d, const std::vector<double>& w, const hyper_point& h) {
    knn_params kp;
    kp.k = std::min<std::size_t>(std::max<std::size_t>(h.k, 1), d.x.rows);
    kp.reference = d.x;
    kp.ref_outcome = d.y;
    kp.ref_weight = w;
    kp.is_continuous = d.is_continuous;
    kp.center.assign(d.x.cols, 0.0);
    kp.scale.assign(d.x.cols, 1.0);
    for (std::size_t j = 0; j < d.x.cols; ++j) {
        if (!d.is_continuous[j]) continue;
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = 0; i < d.x.rows; ++i) {
            s += d.x(i, j);
            s2 += d.x(i, j) * d.x(i, j);
        }
        double mean = s / static_cast<double>(d.x.rows);
        double var = d.x.rows > 1
                         ? std::max(0.0, (s2 - s * mean) / static_cast<double>(d.x.rows - 1))
                         : 0.0;
        kp.center[j] = mean;
        kp.scale[j] = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    return kp;
}

// neighbor ranks are shared across k values when tuning
void knn_neighbor_order(const knn_params& kp, const matrix& q, std::size_t row, std::size_t upto,
                        std::vector<std::pair<double, std::uint32_t>>& scratch) {
    const std::size_t n = kp.reference.rows, p = kp.reference.cols;
    scratch.clear();
    scratch.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            double a = q(row, j), b = kp.reference(i, j);
            if (kp.is_continuous[j]) {
                double za = (a - kp.center[j]) / kp.scale[j];
                double zb = (b - kp.center[j]) / kp.scale[j];
                acc += (za - zb) * (za - zb);
            } else {
                acc += a == b ? 0.0 : 1.0;
            }
        }
        scratch.emplace_back(acc / static_cast<double>(p), static_cast<std::uint32_t>(i));
    }
    std::size_t m = std::min(upto, scratch.size());
    std::partial_sort(scratch.begin(), scratch.begin() + static_cast<long>(m), scratch.end());
}

std::vector<std::vector<double>> knn_score_multi(const knn_params& kp, const matrix& q,
                                                 const std::vector<std::size_t>& ks) {
    std::size_t kmax = *std::max_element(ks.begin(), ks.end());
    kmax = std::min(kmax, kp.reference.rows);
    std::vector<std::vector<double>> out(ks.size(), std::vector<double>(q.rows, 0.0));
    std::vector<std::pair<double, std::uint32_t>> scratch;
    for (std::size_t r = 0; r < q.rows; ++r) {
        knn_neighbor_order(kp, q, r, kmax, scratch);
        double sw = 0.0, sy = 0.0;
        std::size_t taken = 0;
        std::size_t next_k = 0;
        std::vector<double> by_k(ks.size(), 0.0);
        for (std::size_t i = 0; i < kmax; ++i) {
            auto idx = scratch[i].second;
            double wi = kp.ref_weight.empty() ? 1.0 : kp.ref_weight[idx];
            sw += wi;
            sy += wi * kp.ref_outcome[idx];
            ++taken;
            for (std::size_t s = next_k; s < ks.size(); ++s)
                if (std::min(ks[s], kp.reference.rows) == taken) by_k[s] = sw > 0 ? sy / sw : 0.0;
        }
        for (std::size_t s = 0; s < ks.size(); ++s) out[s][r] = by_k[s];
    }
    return out;
}

} // namespace

// --- Fit / score dispatch ------------------------------------------------------------------

model_params fit_model_params(algorithm a, const hyper_point& h, const dataset& design,
                              const std::vector<double>& row_weights, std::uint64_t seed,
                              int threads) {
    design_view d = make_design(design);
    if (!d.has_outcome) throw error(errc::invalid_spec, "design has no outcome column");
    validate_hyper(a, h, d.x.cols);

    switch (a) {
        case algorithm::glm_logistic: {
            irls_options opt;
            opt.weights = row_weights;
            linear_params lp;
            lp.logistic = true;
            lp.beta = irls_logistic(with_intercept(d.x), d.y, opt).beta;
            return lp;
        }
        case algorithm::ridge: {
            if (design.mode == endpoint_mode::classification) {
                irls_options opt;
                opt.weights = row_weights;
                opt.ridge_penalty = h.lambda;
                linear_params lp;
                lp.logistic = true;
                lp.beta = irls_logistic(with_intercept(d.x), d.y, opt).beta;
                return lp;
            }
            return fit_penalized_regression(d.x, d.y, h.lambda, 0.0);
        }
        case algorithm::lasso:
            return fit_penalized_regression(d.x, d.y, h.lambda, 1.0);
        case algorithm::elastic_net:
            return fit_penalized_regression(d.x, d.y, h.lambda, h.alpha);
        case algorithm::glm_linear: {
            linear_params lp;
            lp.logistic = false;
            lp.beta = solve_least_squares(with_intercept(d.x), d.y, row_weights).beta;
            return lp;
        }
        case algorithm::naive_bayes:
            return fit_naive_bayes(d, row_weights, h);
        case algorithm::knn:
            return fit_knn(d, row_weights, h);
        case algorithm::random_forest: {
            forest_params fp;
            fp.n_trees = h.n_trees ? h.n_trees : 500;
            fp.mtry = h.mtry;
            fp.min_node = 5;
            fp.classification = design.mode == endpoint_mode::classification;
            forest_params_fitted out;
            out.forest = fit_random_forest(d.x, d.y, row_weights, fp, seed, threads);
            return out;
        }
        case algorithm::gbm: {
            if (design.mode != endpoint_mode::classification)
                throw error(errc::config_error, "gbm supports classification endpoints only");
            gbm_params gp;
            gp.n_trees = h.n_trees ? h.n_trees : 100;
            gp.interaction_depth = h.depth ? h.depth : 2;
            gp.shrinkage = h.shrinkage;
            gp.min_obs_in_node = h.min_obs;
            gbm_params_fitted out;
            out.model = fit_gbm(d.x, d.y, row_weights, gp, seed);
            return out;
        }
    }
    throw error(errc::config_error, "unsupported algorithm");
}

std::vector<double> score_design(algorithm, const model_params& params, const dataset& design,
                                 endpoint_mode mode) {
    design_view d = make_design(design);
    std::vector<double> out(d.x.rows, 0.0);

    if (const auto* lp = std::get_if<linear_params>(&params)) {
        for (std::size_t r = 0; r < d.x.rows; ++r) {
            double eta = lp->beta[0];
            for (std::size_t j = 0; j < d.x.cols; ++j) eta += lp->beta[j + 1] * d.x(r, j);
            out[r] = lp->logistic ? sigmoid(eta) : eta;
        }
        return out;
    }
    if (const auto* nb = std::get_if<nb_params>(&params)) {
        for (std::size_t r = 0; r < d.x.rows; ++r) out[r] = nb_posterior_positive(*nb, d.x, r);
        return out;
    }
    if (const auto* kp = std::get_if<knn_params>(&params)) {
        auto multi = knn_score_multi(*kp, d.x, {kp->k});
        return multi[0];
    }
    if (const auto* fp = std::get_if<forest_params_fitted>(&params)) {
        for (std::size_t r = 0; r < d.x.rows; ++r) out[r] = fp->forest.predict_row(d.x, r);
        if (mode == endpoint_mode::classification)
            for (double& v : out) v = std::clamp(v, 0.0, 1.0);
        return out;
    }
    if (const auto* gp = std::get_if<gbm_params_fitted>(&params)) {
        for (std::size_t r = 0; r < d.x.rows; ++r) out[r] = gp->model.predict_row(d.x, r);
        return out;
    }
    throw error(errc::config_error, "unknown model parameters");
}

// --- Feature ranges / prediction --------------------------------------------------------------

std::vector<feature_range> compute_feature_ranges(const dataset& train) {
    std::vector<feature_range> ranges;
    for (std::size_t c : train.feature_columns()) {
        const auto& sp = train.specs[c];
        feature_range fr;
        fr.name = sp.name;
        fr.kind = sp.kind;
        if (sp.kind == feature_kind::continuous) {
            double lo = 1e308, hi = -1e308;
            for (std::size_t r = 0; r < train.n_rows; ++r) {
                if (train.is_missing(r, c)) continue;
                lo = std::min(lo, train.at(r, c));
                hi = std::max(hi, train.at(r, c));
            }
            fr.lo = lo;
            fr.hi = hi;
        } else {
            std::vector<int> seen;
            for (std::size_t r = 0; r < train.n_rows; ++r) {
                if (train.is_missing(r, c)) continue;
                int v = static_cast<int>(train.at(r, c));
                if (std::find(seen.begin(), seen.end(), v) == seen.end()) seen.push_back(v);
            }
            std::sort(seen.begin(), seen.end());
            fr.levels = std::move(seen);
        }
        ranges.push_back(std::move(fr));
    }
    return ranges;
}

predictions predict(const fitted_model& m, const dataset& ds) {
    predictions out;
    // extrapolation is judged in raw feature space, before any transform
    dataset raw = project_features(ds, m.rec.input_specs);
    out.extrapolation = extrapolation_flags(m.ranges, raw);

    applied_recipe applied = apply_recipe(m.rec, ds, false);
    out.imputed_fields = std::move(applied.imputed_fields);
    if (applied.data.missing_count() > 0)
        throw error(errc::missing_data,
                    "input has missing cells and the model carries no co-trained imputer");

    auto cols = applied.data.feature_columns();
    if (cols.size() != m.design_columns.size())
        throw error(errc::schema_mismatch, "transformed design width mismatch");
    for (std::size_t j = 0; j < cols.size(); ++j)
        if (applied.data.specs[cols[j]].name != m.design_columns[j])
            throw error(errc::schema_mismatch, "design column '" + m.design_columns[j] + "' missing");

    std::vector<double> scores = score_design(m.algo, m.params, applied.data, m.mode);
    if (m.mode == endpoint_mode::classification) {
        out.probability = std::move(scores);
        out.label.resize(out.probability.size());
        for (std::size_t i = 0; i < out.probability.size(); ++i)
            out.label[i] = out.probability[i] > m.cutoff ? 1 : 0;
    } else {
        out.value = std::move(scores);
    }
    return out;
}

// --- Default grids --------------------------------------------------------------------------

std::vector<hyper_point> default_grid(algorithm a, endpoint_mode mode, const dataset& design_train) {
    std::vector<hyper_point> grid;
    design_view d = make_design(design_train);
    const std::size_t p = d.x.cols;

    auto log_space = [](double lo, double hi, std::size_t count) {
        std::vector<double> v(count);
        double llo = std::log10(lo), lhi = std::log10(hi);
        for (std::size_t i = 0; i < count; ++i)
            v[i] = std::pow(10.0, llo + (lhi - llo) * static_cast<double>(i) /
                                      static_cast<double>(count - 1));
        return v;
    };

    switch (a) {
        case algorithm::glm_logistic:
        case algorithm::glm_linear:
            grid.emplace_back();
            break;
        case algorithm::ridge:
            for (double l : log_space(1e-4, 1e2, 25)) {
                hyper_point h;
                h.lambda = l;
                grid.push_back(h);
            }
            break;
        case algorithm::lasso:
        case algorithm::elastic_net: {
            std::vector<double> alphas =
                a == algorithm::lasso ? std::vector<double>{1.0} : std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0};
            // lambda path: three decades down from lambda_max on the
            // standardized design, 50 points, high to low for warm starts
            const std::size_t n = d.x.rows;
            matrix xs(n, p);
            std::vector<double> yc(n);
            double ym = std::accumulate(d.y.begin(), d.y.end(), 0.0) / static_cast<double>(n);
            for (std::size_t j = 0; j < p; ++j) {
                double s = 0.0, s2 = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    s += d.x(i, j);
                    s2 += d.x(i, j) * d.x(i, j);
                }
                double mean = s / static_cast<double>(n);
                double var = n > 1 ? std::max(0.0, (s2 - s * mean) / static_cast<double>(n - 1)) : 0.0;
                double sd = var > 0.0 ? std::sqrt(var) : 1.0;
                for (std::size_t i = 0; i < n; ++i) xs(i, j) = (d.x(i, j) - mean) / sd;
            }
            for (std::size_t i = 0; i < n; ++i) yc[i] = d.y[i] - ym;
            for (double alpha : alphas) {
                double lmax = elastic_net_lambda_max(xs, yc, alpha);
                if (!(lmax > 0.0)) lmax = 1.0;
                for (double l : log_space(lmax * 1e-3, lmax, 50)) {
                    hyper_point h;
                    h.lambda = l;
                    h.alpha = alpha;
                    grid.push_back(h);
                }
            }
            break;
        }
        case algorithm::naive_bayes:
            for (double fl : {0.0, 1.0}) {
                for (bool kern : {false, true}) {
                    hyper_point h;
                    h.laplace = fl;
                    h.use_kernel = kern;
                    h.adjust = 1.0;
                    grid.push_back(h);
                }
            }
            break;
        case algorithm::knn:
            for (std::size_t k : {5u, 9u, 15u, 25u, 35u}) {
                hyper_point h;
                h.k = k;
                grid.push_back(h);
            }
            break;
        case algorithm::random_forest: {
            std::vector<std::size_t> mtries = {
                static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(p)))),
                static_cast<std::size_t>(p / 3), p};
            for (auto& m : mtries) m = std::max<std::size_t>(1, std::min(m, p));
            std::sort(mtries.begin(), mtries.end());
            mtries.erase(std::unique(mtries.begin(), mtries.end()), mtries.end());
            for (std::size_t m : mtries) {
                hyper_point h;
                h.mtry = m;
                h.n_trees = 500;
                grid.push_back(h);
            }
            break;
        }
        case algorithm::gbm:
            for (std::size_t t : {50u, 100u, 150u}) {
                for (int dep : {1, 2, 3}) {
                    hyper_point h;
                    h.n_trees = t;
                    h.depth = dep;
                    h.shrinkage = 0.1;
                    h.min_obs = 10;
                    grid.push_back(h);
                }
            }
            break;
    }
    (void)mode;
    return grid;
}

// --- Tuner ------------------------------------------------------------------------------------

namespace {

// simpler-model tie break: fewer trees, larger lambda, smaller depth/k
bool simpler_than(algorithm a, const hyper_point& lhs, const hyper_point& rhs) {
    switch (a) {
        case algorithm::ridge:
        case algorithm::lasso:
            return lhs.lambda > rhs.lambda;
        case algorithm::elastic_net:
            if (lhs.lambda != rhs.lambda) return lhs.lambda > rhs.lambda;
            return lhs.alpha > rhs.alpha; // sparser
        case algorithm::random_forest:
            if (lhs.n_trees != rhs.n_trees) return lhs.n_trees < rhs.n_trees;
            return lhs.mtry < rhs.mtry;
        case algorithm::gbm:
            if (lhs.n_trees != rhs.n_trees) return lhs.n_trees < rhs.n_trees;
            if (lhs.depth != rhs.depth) return lhs.depth < rhs.depth;
            return lhs.min_obs > rhs.min_obs;
        case algorithm::knn:
            return lhs.k < rhs.k;
        case algorithm::naive_bayes:
            if (lhs.use_kernel != rhs.use_kernel) return !lhs.use_kernel;
            return lhs.laplace < rhs.laplace;
        default:
            return false;
    }
}

double evaluate_metric(tune_metric metric, const std::vector<double>& scores,
                       const std::vector<double>& truth) {
    if (metric == tune_metric::rmse) {
        double se = 0.0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            double diff = scores[i] - truth[i];
            se += diff * diff;
        }
        return std::sqrt(se / static_cast<double>(scores.size()));
    }
    std::vector<int> labels(truth.size());
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        labels[i] = truth[i] == 1.0 ? 1 : 0;
        (labels[i] ? pos : neg) = true;
    }
    if (!pos || !neg) return std::numeric_limits<double>::quiet_NaN(); // fold skipped
    return auc(scores, labels);
}

std::vector<double> outcome_of(const dataset& design) {
    std::vector<double> y(design.n_rows);
    auto oc = static_cast<std::size_t>(design.outcome_index());
    for (std::size_t r = 0; r < design.n_rows; ++r) y[r] = design.at(r, oc);
    return y;
}

} // namespace

trained_result train_tuned(const dataset& train, const estimator_spec& spec, const train_control& ctrl) {
    if (train.outcome_index() < 0) throw error(errc::invalid_spec, "training data has no outcome");
    if (!algorithm_supports(spec.algo, train.mode))
        throw error(errc::config_error, std::string(algorithm_name(spec.algo)) + " does not support this endpoint");
    if (ctrl.metric == tune_metric::roc && train.mode != endpoint_mode::classification)
        throw error(errc::config_error, "ROC metric requires a classification endpoint");
    if (ctrl.metric == tune_metric::rmse && train.mode != endpoint_mode::regression)
        throw error(errc::config_error, "RMSE metric requires a regression endpoint");

    // degenerate outcome guard
    {
        auto oc = static_cast<std::size_t>(train.outcome_index());
        if (train.mode == endpoint_mode::classification) {
            bool pos = false, neg = false;
            for (std::size_t r = 0; r < train.n_rows; ++r) (train.at(r, oc) == 1.0 ? pos : neg) = true;
            if (!pos || !neg) throw error(errc::degenerate_outcome, "single outcome class in training data");
        } else {
            double lo = 1e308, hi = -1e308;
            for (std::size_t r = 0; r < train.n_rows; ++r) {
                lo = std::min(lo, train.at(r, oc));
                hi = std::max(hi, train.at(r, oc));
            }
            if (!(hi > lo)) throw error(errc::degenerate_outcome, "zero-variance training target");
        }
    }

    recipe_config cfg = ctrl.recipe_cfg;
    cfg.balance = ctrl.balance;

    trained_result result;
    result.grid = spec.grid;
    if (result.grid.empty()) {
        // grid resolution may need the transformed training design (lambda paths)
        recipe_config probe_cfg = cfg;
        probe_cfg.balance = balance_strategy{};
        recipe probe = fit_recipe(train, probe_cfg);
        applied_recipe applied = apply_recipe(probe, train, false);
        result.grid = default_grid(spec.algo, train.mode, applied.data);
    }
    const std::size_t n_grid = result.grid.size();
    if (n_grid == 0) throw error(errc::config_error, "empty hyperparameter grid");

    resampling_plan plan = ctrl.plan;
    plan.seed = ctrl.seed;
    resample_index_set pairs = expand_plan(plan, train.n_rows);
    const std::size_t n_res = pairs.size();

    result.metric_table = matrix(n_grid, n_res, std::numeric_limits<double>::quiet_NaN());
    result.audits.resize(n_res);

    // Single-row assessment sets leave AUC undefined per resample; LOOCV with
    // the ROC metric pools every held-out prediction into one ranking instead.
    const bool pooled_roc = plan.kind == resample_kind::loocv && ctrl.metric == tune_metric::roc;
    std::vector<std::vector<double>> pooled_scores;   // [grid][resample]
    std::vector<double> pooled_truth;
    if (pooled_roc) {
        pooled_scores.assign(n_grid, std::vector<double>(n_res, 0.0));
        pooled_truth.assign(n_res, 0.0);
    }

    // group grid points that share one fit: gbm tree prefixes, knn k values,
    // penalized linear warm starts along the lambda path
    struct fit_group {
        std::vector<std::size_t> members;
    };
    std::vector<fit_group> groups;
    if (spec.algo == algorithm::gbm) {
        std::map<std::tuple<int, double, std::size_t>, std::size_t> by_key;
        for (std::size_t gidx = 0; gidx < n_grid; ++gidx) {
            const auto& h = result.grid[gidx];
            auto key = std::make_tuple(h.depth, h.shrinkage, h.min_obs);
            auto it = by_key.find(key);
            if (it == by_key.end()) {
                by_key.emplace(key, groups.size());
                groups.push_back({{gidx}});
            } else {
                groups[it->second].members.push_back(gidx);
            }
        }
    } else if (spec.algo == algorithm::knn) {
        groups.push_back({});
        for (std::size_t gidx = 0; gidx < n_grid; ++gidx) groups[0].members.push_back(gidx);
    } else if (spec.algo == algorithm::lasso || spec.algo == algorithm::elastic_net ||
               (spec.algo == algorithm::ridge && train.mode == endpoint_mode::regression)) {
        std::map<double, std::size_t> by_alpha;
        for (std::size_t gidx = 0; gidx < n_grid; ++gidx) {
            double alpha = spec.algo == algorithm::elastic_net ? result.grid[gidx].alpha
                           : spec.algo == algorithm::lasso     ? 1.0
                                                               : 0.0;
            auto it = by_alpha.find(alpha);
            if (it == by_alpha.end()) {
                by_alpha.emplace(alpha, groups.size());
                groups.push_back({{gidx}});
            } else {
                groups[it->second].members.push_back(gidx);
            }
        }
        for (auto& g : groups) // descending lambda for warm starts
            std::sort(g.members.begin(), g.members.end(), [&](std::size_t l, std::size_t r) {
                return result.grid[l].lambda > result.grid[r].lambda;
            });
    } else {
        for (std::size_t gidx = 0; gidx < n_grid; ++gidx) groups.push_back({{gidx}});
    }

    parallel_for(n_res, ctrl.threads, [&](std::size_t r) {
        std::uint64_t res_seed = mix_seed(ctrl.seed, 1000 + r);
        dataset analysis = train.take_rows(pairs[r].analysis);
        dataset assessment = train.take_rows(pairs[r].assessment);

        recipe rec = fit_recipe(analysis, cfg);
        applied_recipe fit_data = apply_recipe(rec, analysis, true, mix_seed(res_seed, 1));
        applied_recipe assess_data = apply_recipe(rec, assessment, false);
        if (fit_data.data.missing_count() > 0 || assess_data.data.missing_count() > 0)
            throw error(errc::missing_data, "resample data has missing cells; enable imputation");

        result.audits[r].fit_row_ids = rec.fit_row_ids;
        result.audits[r].assessment_row_ids = assessment.row_ids;
        result.audits[r].recipe_fingerprint = rec.fingerprint;
        if (assessment.n_rows == 0) return;

        std::vector<double> truth = outcome_of(assess_data.data);
        if (pooled_roc) pooled_truth[r] = truth[0];
        auto record = [&](std::size_t gidx, const std::vector<double>& scores) {
            if (pooled_roc) pooled_scores[gidx][r] = scores[0];
            else result.metric_table(gidx, r) = evaluate_metric(ctrl.metric, scores, truth);
        };

        for (const auto& group : groups) {
            if (spec.algo == algorithm::gbm) {
                std::size_t max_trees = 0;
                for (std::size_t gidx : group.members)
                    max_trees = std::max(max_trees, result.grid[gidx].n_trees);
                hyper_point h = result.grid[group.members.front()];
                h.n_trees = max_trees;
                std::uint64_t fit_seed = mix_seed(res_seed, 100 + group.members.front());
                model_params params = fit_model_params(spec.algo, h, fit_data.data,
                                                       fit_data.row_weights, fit_seed, 1);
                const auto& model = std::get<gbm_params_fitted>(params).model;
                design_view dv = make_design(assess_data.data);
                for (std::size_t gidx : group.members) {
                    std::vector<double> scores(dv.x.rows);
                    for (std::size_t row = 0; row < dv.x.rows; ++row)
                        scores[row] = sigmoid(model.score_row(dv.x, row, result.grid[gidx].n_trees));
                    record(gidx, scores);
                }
            } else if (spec.algo == algorithm::knn) {
                hyper_point h = result.grid[group.members.front()];
                std::uint64_t fit_seed = mix_seed(res_seed, 100 + group.members.front());
                model_params params =
                    fit_model_params(spec.algo, h, fit_data.data, fit_data.row_weights, fit_seed, 1);
                const auto& kp = std::get<knn_params>(params);
                std::vector<std::size_t> ks;
                for (std::size_t gidx : group.members) ks.push_back(result.grid[gidx].k);
                design_view dv = make_design(assess_data.data);
                auto multi = knn_score_multi(kp, dv.x, ks);
                for (std::size_t s = 0; s < group.members.size(); ++s)
                    record(group.members[s], multi[s]);
            } else if (group.members.size() > 1) {
                // warm-started lambda path
                design_view dv = make_design(fit_data.data);
                std::vector<double> warm;
                for (std::size_t gidx : group.members) {
                    const auto& h = result.grid[gidx];
                    double alpha = spec.algo == algorithm::elastic_net ? h.alpha
                                   : spec.algo == algorithm::lasso     ? 1.0
                                                                       : 0.0;
                    linear_params lp = fit_penalized_regression(dv.x, dv.y, h.lambda, alpha, warm);
                    warm.assign(lp.beta.begin() + 1, lp.beta.end()); // reuse on the next lambda
                    model_params params = lp;
                    std::vector<double> scores =
                        score_design(spec.algo, params, assess_data.data, train.mode);
                    record(gidx, scores);
                }
            } else {
                std::size_t gidx = group.members.front();
                std::uint64_t fit_seed = mix_seed(res_seed, 100 + gidx);
                model_params params = fit_model_params(spec.algo, result.grid[gidx], fit_data.data,
                                                       fit_data.row_weights, fit_seed, 1);
                std::vector<double> scores = score_design(spec.algo, params, assess_data.data, train.mode);
                record(gidx, scores);
            }
        }
    });

    // mean over usable resamples, then pick the winner
    result.metric_mean.assign(n_grid, std::numeric_limits<double>::quiet_NaN());
    if (pooled_roc) {
        std::vector<int> labels(n_res);
        for (std::size_t r = 0; r < n_res; ++r) labels[r] = pooled_truth[r] == 1.0 ? 1 : 0;
        for (std::size_t gidx = 0; gidx < n_grid; ++gidx)
            result.metric_mean[gidx] = auc(pooled_scores[gidx], labels);
        result.selection_note = "loocv ROC pooled over held-out predictions; ";
    } else {
        for (std::size_t gidx = 0; gidx < n_grid; ++gidx) {
            double sum = 0.0;
            std::size_t count = 0;
            for (std::size_t r = 0; r < n_res; ++r) {
                double v = result.metric_table(gidx, r);
                if (std::isnan(v)) continue;
                sum += v;
                ++count;
            }
            if (count > 0) result.metric_mean[gidx] = sum / static_cast<double>(count);
        }
    }
    bool maximize = ctrl.metric == tune_metric::roc;
    std::size_t best = n_grid;
    for (std::size_t gidx = 0; gidx < n_grid; ++gidx) {
        double v = result.metric_mean[gidx];
        if (std::isnan(v)) continue;
        if (best == n_grid) {
            best = gidx;
            continue;
        }
        double cur = result.metric_mean[best];
        if ((maximize && v > cur) || (!maximize && v < cur)) {
            best = gidx;
        } else if (v == cur && simpler_than(spec.algo, result.grid[gidx], result.grid[best])) {
            best = gidx;
        }
    }
    if (best == n_grid) throw error(errc::non_convergence, "no resample produced a usable metric");
    result.best_index = best;
    result.selection_note += std::string(algorithm_name(spec.algo)) + " best " +
                             result.grid[best].describe(spec.algo);

    // refit the winning point on all training rows
    recipe full_rec = fit_recipe(train, cfg);
    applied_recipe full_data = apply_recipe(full_rec, train, true, mix_seed(ctrl.seed, 0x5EF1));
    std::uint64_t refit_seed = mix_seed(ctrl.seed, 0x5EF2);
    result.best.format_version = 1;
    result.best.algo = spec.algo;
    result.best.hyper = result.grid[best];
    result.best.mode = train.mode;
    result.best.params = fit_model_params(spec.algo, result.grid[best], full_data.data,
                                          full_data.row_weights, refit_seed, ctrl.threads);
    result.best.rec = full_rec;
    for (std::size_t c : full_data.data.feature_columns())
        result.best.design_columns.push_back(full_data.data.specs[c].name);
    result.best.ranges = compute_feature_ranges(train);
    result.best.cutoff = 0.5;
    {
        auto oc = static_cast<std::size_t>(train.outcome_index());
        result.best.outcome_name = train.specs[oc].name;
    }
    return result;
}

} // namespace clinpred
