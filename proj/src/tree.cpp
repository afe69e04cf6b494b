#include "clinpred/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "clinpred/parallel.hpp"
#include "clinpred/solvers.hpp"

namespace clinpred {

namespace {

struct node_task {
    int node_index;
    std::vector<std::uint32_t> rows;
    int depth;
};

// Per-node impurity: Gini 2p(1-p) for classification, variance for regression.
double node_impurity(const matrix&, const std::vector<double>& y, const std::vector<double>& w,
                     const std::vector<std::uint32_t>& rows, bool classification, double& mean_out) {
    double sw = 0.0, sy = 0.0, syy = 0.0;
    for (auto r : rows) {
        double wi = w.empty() ? 1.0 : w[r];
        sw += wi;
        sy += wi * y[r];
        syy += wi * y[r] * y[r];
    }
    mean_out = sw > 0 ? sy / sw : 0.0;
    if (classification) {
        double p = mean_out;
        return 2.0 * p * (1.0 - p);
    }
    return sw > 0 ? std::max(0.0, syy / sw - mean_out * mean_out) : 0.0;
}

struct split_choice {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double decrease = 0.0; // node-relative impurity decrease
};

split_choice best_split(const matrix& x, const std::vector<double>& y, const std::vector<double>& w,
                        const std::vector<std::uint32_t>& rows, const std::vector<std::size_t>& features,
                        std::size_t min_node, bool classification, double parent_impurity) {
    split_choice best;
    std::vector<std::pair<double, std::uint32_t>> order;
    order.reserve(rows.size());
    for (std::size_t f : features) {
        order.clear();
        for (auto r : rows) order.emplace_back(x(r, f), r);
        std::sort(order.begin(), order.end());
        if (order.front().first == order.back().first) continue;

        double sw_tot = 0.0, sy_tot = 0.0, syy_tot = 0.0;
        for (auto r : rows) {
            double wi = w.empty() ? 1.0 : w[r];
            sw_tot += wi;
            sy_tot += wi * y[r];
            syy_tot += wi * y[r] * y[r];
        }
        double sw_l = 0.0, sy_l = 0.0, syy_l = 0.0;
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            auto r = order[i].second;
            double wi = w.empty() ? 1.0 : w[r];
            sw_l += wi;
            sy_l += wi * y[r];
            syy_l += wi * y[r] * y[r];
            if (order[i].first == order[i + 1].first) continue;
            std::size_t n_left = i + 1, n_right = order.size() - n_left;
            if (n_left < min_node || n_right < min_node) continue;
            double sw_r = sw_tot - sw_l, sy_r = sy_tot - sy_l, syy_r = syy_tot - syy_l;
            if (sw_l <= 0.0 || sw_r <= 0.0) continue;
            double imp_l, imp_r;
            if (classification) {
                double pl = sy_l / sw_l, pr = sy_r / sw_r;
                imp_l = 2.0 * pl * (1.0 - pl);
                imp_r = 2.0 * pr * (1.0 - pr);
            } else {
                double ml = sy_l / sw_l, mr = sy_r / sw_r;
                imp_l = std::max(0.0, syy_l / sw_l - ml * ml);
                imp_r = std::max(0.0, syy_r / sw_r - mr * mr);
            }
            double dec = parent_impurity - (sw_l * imp_l + sw_r * imp_r) / sw_tot;
            if (dec > best.decrease + 1e-15) {
                best.found = true;
                best.feature = f;
                best.threshold = 0.5 * (order[i].first + order[i + 1].first);
                best.decrease = dec;
            }
        }
    }
    return best;
}

} // namespace

grown_tree cart_grow(const matrix& x, const std::vector<double>& y, const std::vector<double>& weights,
                     const cart_params& params, rng& g) {
    grown_tree out;
    out.feature_importance.assign(x.cols, 0.0);
    const std::size_t p = x.cols;

    std::vector<std::uint32_t> all(x.rows);
    std::iota(all.begin(), all.end(), 0u);
    out.tree.nodes.emplace_back();

    double total_weight = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) total_weight += weights.empty() ? 1.0 : weights[i];

    std::vector<std::size_t> feature_pool(p);
    std::iota(feature_pool.begin(), feature_pool.end(), 0u);

    std::vector<node_task> stack;
    stack.push_back({0, std::move(all), 0});
    while (!stack.empty()) {
        node_task task = std::move(stack.back());
        stack.pop_back();
        double mean = 0.0;
        double impurity = node_impurity(x, y, weights, task.rows, params.classification, mean);
        tree_node& node = out.tree.nodes[static_cast<std::size_t>(task.node_index)];
        node.value = mean;
        if (task.depth >= params.max_depth || impurity <= 0.0 ||
            task.rows.size() < 2 * std::max<std::size_t>(params.min_node, 1)) {
            continue; // leaf
        }

        std::vector<std::size_t> features;
        if (params.mtry == 0 || params.mtry >= p) {
            features = feature_pool;
        } else {
            // draw mtry distinct features, then scan in index order for
            // deterministic tie-breaks
            std::vector<std::size_t> pool = feature_pool;
            for (std::size_t i = 0; i < params.mtry; ++i) {
                std::size_t j = i + static_cast<std::size_t>(g.below(pool.size() - i));
                std::swap(pool[i], pool[j]);
            }
            features.assign(pool.begin(), pool.begin() + static_cast<long>(params.mtry));
            std::sort(features.begin(), features.end());
        }

        split_choice split = best_split(x, y, weights, task.rows, features,
                                        std::max<std::size_t>(params.min_node, 1),
                                        params.classification, impurity);
        if (!split.found) continue;

        double node_weight = 0.0;
        for (auto r : task.rows) node_weight += weights.empty() ? 1.0 : weights[r];
        out.feature_importance[split.feature] += split.decrease * node_weight / std::max(total_weight, 1e-300);

        std::vector<std::uint32_t> left_rows, right_rows;
        left_rows.reserve(task.rows.size());
        right_rows.reserve(task.rows.size());
        for (auto r : task.rows)
            (x(r, split.feature) <= split.threshold ? left_rows : right_rows).push_back(r);

        int node_index = task.node_index;
        int li = static_cast<int>(out.tree.nodes.size());
        out.tree.nodes.emplace_back();
        int ri = static_cast<int>(out.tree.nodes.size());
        out.tree.nodes.emplace_back();
        tree_node& parent = out.tree.nodes[static_cast<std::size_t>(node_index)];
        parent.feature = static_cast<int>(split.feature);
        parent.threshold = split.threshold;
        parent.left = li;
        parent.right = ri;
        // right pushed first so the left branch is processed next (stable layout)
        stack.push_back({ri, std::move(right_rows), task.depth + 1});
        stack.push_back({li, std::move(left_rows), task.depth + 1});
    }
    return out;
}

random_forest fit_random_forest(const matrix& x, const std::vector<double>& y,
                                const std::vector<double>& weights, const forest_params& params,
                                std::uint64_t seed, int threads) {
    random_forest forest;
    forest.classification = params.classification;
    forest.trees.resize(params.n_trees);
    std::vector<std::vector<double>> importances(params.n_trees);

    std::size_t mtry = params.mtry;
    if (mtry == 0) {
        mtry = params.classification
                   ? static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(x.cols))))
                   : static_cast<std::size_t>(x.cols / 3);
        mtry = std::max<std::size_t>(1, std::min(mtry, x.cols));
    }

    parallel_for(params.n_trees, threads, [&](std::size_t t) {
        rng g(mix_seed(seed, t));
        const std::size_t n = x.rows;
        matrix xb(n, x.cols);
        std::vector<double> yb(n), wb;
        if (!weights.empty()) wb.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            auto src = static_cast<std::size_t>(g.below(n));
            for (std::size_t j = 0; j < x.cols; ++j) xb(i, j) = x(src, j);
            yb[i] = y[src];
            if (!weights.empty()) wb[i] = weights[src];
        }
        cart_params cp;
        cp.max_depth = params.max_depth;
        cp.min_node = params.min_node;
        cp.mtry = mtry;
        cp.classification = params.classification;
        grown_tree grown = cart_grow(xb, yb, wb, cp, g);
        forest.trees[t] = std::move(grown.tree);
        importances[t] = std::move(grown.feature_importance);
    });

    forest.feature_importance.assign(x.cols, 0.0);
    for (const auto& imp : importances)
        for (std::size_t j = 0; j < imp.size(); ++j) forest.feature_importance[j] += imp[j];
    return forest;
}

double gbm_model::predict_row(const matrix& x, std::size_t row) const {
    return sigmoid(score_row(x, row, trees.size()));
}

gbm_model fit_gbm(const matrix& x, const std::vector<double>& y, const std::vector<double>& weights,
                  const gbm_params& params, std::uint64_t seed) {
    const std::size_t n = x.rows;
    gbm_model model;
    model.shrinkage = params.shrinkage;
    model.feature_importance.assign(x.cols, 0.0);

    double sw = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double wi = weights.empty() ? 1.0 : weights[i];
        sw += wi;
        sy += wi * y[i];
    }
    double base = std::clamp(sw > 0 ? sy / sw : 0.5, 1e-6, 1.0 - 1e-6);
    model.f0 = std::log(base / (1.0 - base));

    std::vector<double> f(n, model.f0), resid(n), prob(n);
    rng g(mix_seed(seed, 0x67626dULL));

    auto log_loss = [&]() {
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double wi = weights.empty() ? 1.0 : weights[i];
            double p = std::clamp(sigmoid(f[i]), 1e-15, 1.0 - 1e-15);
            ll -= wi * (y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p));
        }
        return ll / std::max(sw, 1e-300);
    };

    cart_params cp;
    cp.max_depth = params.interaction_depth;
    cp.min_node = params.min_obs_in_node;
    cp.mtry = 0;
    cp.classification = false; // gradient trees split on variance

    for (std::size_t stage = 0; stage < params.n_trees; ++stage) {
        for (std::size_t i = 0; i < n; ++i) {
            prob[i] = sigmoid(f[i]);
            resid[i] = y[i] - prob[i];
        }
        grown_tree grown = cart_grow(x, resid, weights, cp, g);
        // terminal Newton steps: sum(w*r) / sum(w*p*(1-p)) per leaf
        std::vector<double> num(grown.tree.nodes.size(), 0.0), den(grown.tree.nodes.size(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            int leaf = grown.tree.leaf_for_row(x, i);
            double wi = weights.empty() ? 1.0 : weights[i];
            num[static_cast<std::size_t>(leaf)] += wi * resid[i];
            den[static_cast<std::size_t>(leaf)] += wi * prob[i] * (1.0 - prob[i]);
        }
        for (std::size_t j = 0; j < grown.tree.nodes.size(); ++j) {
            if (grown.tree.nodes[j].feature >= 0) continue;
            double step = num[j] / std::max(den[j], 1e-10);
            grown.tree.nodes[j].value = std::clamp(step, -4.0, 4.0);
        }
        for (std::size_t i = 0; i < n; ++i)
            f[i] += params.shrinkage * grown.tree.predict_row(x, i);
        for (std::size_t j = 0; j < x.cols; ++j) model.feature_importance[j] += grown.feature_importance[j];
        model.trees.push_back(std::move(grown.tree));
        model.train_log_loss.push_back(log_loss());
    }
    return model;
}

} // namespace clinpred
