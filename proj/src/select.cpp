#include "clinpred/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "clinpred/error.hpp"
#include "clinpred/eval.hpp"
#include "clinpred/parallel.hpp"
#include "clinpred/preprocess.hpp"
#include "clinpred/rng.hpp"

namespace clinpred {

namespace {

double folded_single_feature_auc(const std::vector<double>& values, const std::vector<int>& labels) {
    bool pos = false, neg = false;
    for (int y : labels) (y ? pos : neg) = true;
    if (!pos || !neg) return 0.5;
    double a = auc(values, labels);
    return std::max(a, 1.0 - a);
}

double squared_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;
    double c = sab / std::sqrt(saa * sbb);
    return c * c;
}

// model-free filter score per feature column of a raw dataset
std::vector<double> filter_scores(const dataset& ds, const std::vector<std::size_t>& cols) {
    auto oc = static_cast<std::size_t>(ds.outcome_index());
    std::vector<double> scores(cols.size(), 0.0);
    for (std::size_t j = 0; j < cols.size(); ++j) {
        std::vector<double> v;
        std::vector<int> labels;
        std::vector<double> truth;
        for (std::size_t r = 0; r < ds.n_rows; ++r) {
            if (ds.is_missing(r, cols[j]) || ds.is_missing(r, oc)) continue;
            v.push_back(ds.at(r, cols[j]));
            if (ds.mode == endpoint_mode::classification)
                labels.push_back(ds.at(r, oc) == 1.0 ? 1 : 0);
            else truth.push_back(ds.at(r, oc));
        }
        bool is_constant = v.empty() || std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; });
        if (ds.mode == endpoint_mode::classification)
            scores[j] = is_constant ? 0.5 : folded_single_feature_auc(v, labels);
        else
            scores[j] = is_constant ? 0.0 : squared_correlation(v, truth);
    }
    return scores;
}

// Ranking criterion after a full-feature fit: standardized |coefficient| for
// linear models, impurity-decrease totals for tree ensembles, the model-free
// filter otherwise. Scores on design columns are folded back onto source
// features through the recipe's one-hot maps.
std::map<std::string, double> rank_source_features(algorithm algo, const model_params& params,
                                                   const dataset& design, const recipe& rec) {
    auto cols = design.feature_columns();
    std::vector<double> col_scores(cols.size(), 0.0);

    if (const auto* lp = std::get_if<linear_params>(&params)) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            double s = 0.0, s2 = 0.0;
            for (std::size_t r = 0; r < design.n_rows; ++r) {
                double v = design.at(r, cols[j]);
                s += v;
                s2 += v * v;
            }
            double mean = s / static_cast<double>(design.n_rows);
            double var = design.n_rows > 1
                             ? std::max(0.0, (s2 - s * mean) / static_cast<double>(design.n_rows - 1))
                             : 0.0;
            col_scores[j] = std::abs(lp->beta[j + 1]) * std::sqrt(var);
        }
    } else if (const auto* fp = std::get_if<forest_params_fitted>(&params)) {
        col_scores = fp->forest.feature_importance;
    } else if (const auto* gp = std::get_if<gbm_params_fitted>(&params)) {
        col_scores = gp->model.feature_importance;
    } else {
        col_scores = filter_scores(design, cols);
        (void)algo;
    }

    std::map<std::string, double> by_source;
    for (std::size_t j = 0; j < cols.size(); ++j) {
        std::string name = design.specs[cols[j]].name;
        for (const auto& map : rec.one_hot_maps) {
            if (std::find(map.produced.begin(), map.produced.end(), name) != map.produced.end()) {
                name = map.source;
                break;
            }
        }
        by_source[name] += col_scores[j];
    }
    return by_source;
}

std::vector<std::string> order_by_rank(const std::map<std::string, double>& scores,
                                       const std::vector<std::string>& feature_order) {
    std::vector<std::string> ordered = feature_order;
    std::stable_sort(ordered.begin(), ordered.end(), [&](const std::string& a, const std::string& b) {
        double sa = scores.count(a) ? scores.at(a) : 0.0;
        double sb = scores.count(b) ? scores.at(b) : 0.0;
        return sa > sb;
    });
    return ordered;
}

dataset restrict_features(const dataset& ds, const std::vector<std::string>& keep) {
    dataset out = ds;
    for (auto& sp : out.specs) {
        if (sp.role != column_role::feature) continue;
        if (std::find(keep.begin(), keep.end(), sp.name) == keep.end()) sp.role = column_role::ignored;
    }
    return out;
}

hyper_point rfe_default_hyper(algorithm a) {
    hyper_point h;
    switch (a) {
        case algorithm::random_forest:
            h.n_trees = 100;
            break;
        case algorithm::gbm:
            h.n_trees = 100;
            h.depth = 2;
            break;
        case algorithm::knn:
            h.k = 9;
            break;
        case algorithm::ridge:
        case algorithm::lasso:
        case algorithm::elastic_net:
            h.lambda = 0.001;
            break;
        default:
            break;
    }
    return h;
}

} // namespace

rfe_result rfe_run(const dataset& train, const estimator_spec& spec,
                   const std::vector<std::size_t>& sizes, const resampling_plan& plan,
                   const recipe_config& recipe_cfg, tune_metric metric, std::uint64_t seed,
                   int threads) {
    std::vector<std::string> features;
    for (const auto& sp : train.specs)
        if (sp.role == column_role::feature) features.push_back(sp.name);
    const std::size_t p = features.size();
    if (sizes.empty()) throw error(errc::sizes_out_of_range, "no subset sizes requested");
    for (std::size_t s : sizes)
        if (s < 1 || s > p)
            throw error(errc::sizes_out_of_range,
                        "size " + std::to_string(s) + " outside [1," + std::to_string(p) + "]");

    std::vector<std::size_t> ordered_sizes(sizes);
    std::sort(ordered_sizes.begin(), ordered_sizes.end());
    ordered_sizes.erase(std::unique(ordered_sizes.begin(), ordered_sizes.end()), ordered_sizes.end());

    hyper_point hyper = spec.grid.empty() ? rfe_default_hyper(spec.algo) : spec.grid.front();

    resampling_plan rp = plan;
    rp.seed = seed;
    resample_index_set pairs = expand_plan(rp, train.n_rows);

    rfe_result result;
    result.sizes = ordered_sizes;
    result.trace = matrix(ordered_sizes.size(), pairs.size(), std::numeric_limits<double>::quiet_NaN());

    recipe_config cfg = recipe_cfg;
    cfg.balance = balance_strategy{}; // ranking fits stay unweighted

    auto score_subset = [&](const dataset& analysis, const dataset& assessment,
                            const std::vector<std::string>& keep, std::uint64_t fit_seed) {
        dataset a = restrict_features(analysis, keep);
        dataset b = restrict_features(assessment, keep);
        recipe rec = fit_recipe(a, cfg);
        applied_recipe fit_data = apply_recipe(rec, a, true, mix_seed(fit_seed, 1));
        applied_recipe assess_data = apply_recipe(rec, b, false);
        model_params params =
            fit_model_params(spec.algo, hyper, fit_data.data, fit_data.row_weights, fit_seed, 1);
        std::vector<double> scores = score_design(spec.algo, params, assess_data.data, train.mode);
        auto oc = static_cast<std::size_t>(assess_data.data.outcome_index());
        if (metric == tune_metric::rmse) {
            double se = 0.0;
            for (std::size_t r = 0; r < assess_data.data.n_rows; ++r) {
                double diff = scores[r] - assess_data.data.at(r, oc);
                se += diff * diff;
            }
            return std::sqrt(se / static_cast<double>(assess_data.data.n_rows));
        }
        std::vector<int> labels(assess_data.data.n_rows);
        bool pos = false, neg = false;
        for (std::size_t r = 0; r < assess_data.data.n_rows; ++r) {
            labels[r] = assess_data.data.at(r, oc) == 1.0 ? 1 : 0;
            (labels[r] ? pos : neg) = true;
        }
        if (!pos || !neg) return std::numeric_limits<double>::quiet_NaN();
        return auc(scores, labels);
    };

    parallel_for(pairs.size(), threads, [&](std::size_t r) {
        std::uint64_t res_seed = mix_seed(seed, 3000 + r);
        dataset analysis = train.take_rows(pairs[r].analysis);
        dataset assessment = train.take_rows(pairs[r].assessment);
        if (assessment.n_rows == 0) return;

        // rank once per resample from a full-feature fit on the analysis rows
        recipe rec = fit_recipe(analysis, cfg);
        applied_recipe fit_data = apply_recipe(rec, analysis, true, mix_seed(res_seed, 1));
        model_params params = fit_model_params(spec.algo, hyper, fit_data.data,
                                               fit_data.row_weights, mix_seed(res_seed, 2), 1);
        auto ranks = rank_source_features(spec.algo, params, fit_data.data, rec);
        std::vector<std::string> ordered = order_by_rank(ranks, features);

        for (std::size_t si = 0; si < ordered_sizes.size(); ++si) {
            std::vector<std::string> keep(ordered.begin(),
                                          ordered.begin() + static_cast<long>(ordered_sizes[si]));
            result.trace(si, r) = score_subset(analysis, assessment, keep, mix_seed(res_seed, 10 + si));
        }
    });

    result.profile.assign(ordered_sizes.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t si = 0; si < ordered_sizes.size(); ++si) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t r = 0; r < pairs.size(); ++r) {
            double v = result.trace(si, r);
            if (std::isnan(v)) continue;
            sum += v;
            ++count;
        }
        if (count) result.profile[si] = sum / static_cast<double>(count);
    }

    bool maximize = metric == tune_metric::roc;
    std::size_t best = ordered_sizes.size();
    for (std::size_t si = 0; si < ordered_sizes.size(); ++si) {
        if (std::isnan(result.profile[si])) continue;
        if (best == ordered_sizes.size()) {
            best = si;
            continue;
        }
        double v = result.profile[si], cur = result.profile[best];
        if ((maximize && v > cur) || (!maximize && v < cur)) best = si;
        // exact ties keep the smaller subset
    }
    if (best == ordered_sizes.size()) throw error(errc::non_convergence, "no usable RFE metric");
    result.best_size = ordered_sizes[best];

    // final ranking from a full-training fit
    recipe rec = fit_recipe(train, cfg);
    applied_recipe fit_data = apply_recipe(rec, train, true, mix_seed(seed, 4000));
    model_params params =
        fit_model_params(spec.algo, hyper, fit_data.data, fit_data.row_weights, mix_seed(seed, 4001), 1);
    auto ranks = rank_source_features(spec.algo, params, fit_data.data, rec);
    std::vector<std::string> ordered = order_by_rank(ranks, features);
    result.selected.assign(ordered.begin(), ordered.begin() + static_cast<long>(result.best_size));
    return result;
}

// --- PCA ------------------------------------------------------------------------------

pca_model pca_fit(const matrix& x, std::size_t n_components) {
    const std::size_t n = x.rows, p = x.cols;
    if (n_components < 1 || n_components > p)
        throw error(errc::invalid_spec, "component count outside [1,p]");
    if (n < 2) throw error(errc::too_few_rows, "need at least 2 rows");

    pca_model m;
    m.center.assign(p, 0.0);
    m.scale.assign(p, 1.0);
    for (std::size_t j = 0; j < p; ++j) {
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s += x(i, j);
            s2 += x(i, j) * x(i, j);
        }
        m.center[j] = s / static_cast<double>(n);
        double var = std::max(0.0, (s2 - s * m.center[j]) / static_cast<double>(n - 1));
        m.scale[j] = var > 0.0 ? std::sqrt(var) : 1.0;
    }

    // correlation matrix of the standardized input
    matrix corr(p, p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < p; ++a) {
            double za = (x(i, a) - m.center[a]) / m.scale[a];
            for (std::size_t b = a; b < p; ++b) {
                double zb = (x(i, b) - m.center[b]) / m.scale[b];
                corr(a, b) += za * zb;
            }
        }
    }
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = a; b < p; ++b) {
            double v = corr(a, b) / static_cast<double>(n - 1);
            corr(a, b) = v;
            corr(b, a) = v;
        }

    eigen_result eig = jacobi_eigen(corr);
    m.rotation = matrix(p, n_components);
    m.explained.resize(n_components);
    for (std::size_t c = 0; c < n_components; ++c) {
        m.explained[c] = eig.values[c];
        if (eig.values[c] < 1e-10) m.rank_deficient = true; // kept, flagged
        // sign fix: largest-magnitude loading positive
        std::size_t arg = 0;
        for (std::size_t r = 1; r < p; ++r)
            if (std::abs(eig.vectors(r, c)) > std::abs(eig.vectors(arg, c))) arg = r;
        double sign = eig.vectors(arg, c) < 0.0 ? -1.0 : 1.0;
        for (std::size_t r = 0; r < p; ++r) m.rotation(r, c) = sign * eig.vectors(r, c);
    }
    return m;
}

matrix pca_transform(const pca_model& m, const matrix& x) {
    matrix out(x.rows, m.rotation.cols, 0.0);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t c = 0; c < m.rotation.cols; ++c) {
            double s = 0.0;
            for (std::size_t j = 0; j < x.cols; ++j)
                s += (x(i, j) - m.center[j]) / m.scale[j] * m.rotation(j, c);
            out(i, c) = s;
        }
    return out;
}

matrix pca_inverse_transform(const pca_model& m, const matrix& scores) {
    matrix out(scores.rows, m.rotation.rows, 0.0);
    for (std::size_t i = 0; i < scores.rows; ++i)
        for (std::size_t j = 0; j < m.rotation.rows; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < m.rotation.cols; ++c)
                s += m.rotation(j, c) * scores(i, c);
            out(i, j) = s; // standardized space
        }
    return out;
}

// --- Importance ----------------------------------------------------------------------

importance_report variable_importance(const dataset& train) {
    if (train.outcome_index() < 0) throw error(errc::invalid_spec, "no outcome column designated");
    auto cols = train.feature_columns();
    importance_report rep;
    std::vector<double> raw = filter_scores(train, cols);
    for (std::size_t j = 0; j < cols.size(); ++j) {
        importance_entry e;
        e.feature = train.specs[cols[j]].name;
        e.raw = raw[j];
        bool constant = true;
        double first = 0.0;
        bool seen = false;
        for (std::size_t r = 0; r < train.n_rows && constant; ++r) {
            if (train.is_missing(r, cols[j])) continue;
            if (!seen) {
                first = train.at(r, cols[j]);
                seen = true;
            } else if (train.at(r, cols[j]) != first) {
                constant = false;
            }
        }
        e.constant = constant;
        rep.entries.push_back(std::move(e));
    }
    double lo = 1e308, hi = -1e308;
    for (const auto& e : rep.entries) {
        lo = std::min(lo, e.raw);
        hi = std::max(hi, e.raw);
    }
    for (auto& e : rep.entries)
        e.scaled = hi > lo ? 100.0 * (e.raw - lo) / (hi - lo) : 0.0;
    return rep;
}

} // namespace clinpred
