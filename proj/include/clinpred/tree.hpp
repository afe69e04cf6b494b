#pragma once

#include <cstdint>
#include <vector>

#include "clinpred/linalg.hpp"
#include "clinpred/rng.hpp"

namespace clinpred {

struct tree_node {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    double value = 0.0; // positive-class fraction, mean, or boosting step
};

struct decision_tree {
    std::vector<tree_node> nodes;

    double predict_row(const matrix& x, std::size_t row) const {
        int i = 0;
        while (nodes[i].feature >= 0)
            i = x(row, static_cast<std::size_t>(nodes[i].feature)) <= nodes[i].threshold
                    ? nodes[i].left
                    : nodes[i].right;
        return nodes[i].value;
    }
    int leaf_for_row(const matrix& x, std::size_t row) const {
        int i = 0;
        while (nodes[i].feature >= 0)
            i = x(row, static_cast<std::size_t>(nodes[i].feature)) <= nodes[i].threshold
                    ? nodes[i].left
                    : nodes[i].right;
        return i;
    }
};

struct cart_params {
    int max_depth = 30;
    std::size_t min_node = 5; // smallest admissible child
    std::size_t mtry = 0;     // features scanned per node, 0 = all
    bool classification = true;
};

struct grown_tree {
    decision_tree tree;
    std::vector<double> feature_importance; // impurity-decrease totals, one per feature
};

// Greedy binary CART. Splits maximize the Gini decrease (classification,
// binary outcome) or variance decrease (regression); degenerate nodes become
// leaves. Row weights enter every count.
grown_tree cart_grow(const matrix& x, const std::vector<double>& y, const std::vector<double>& weights,
                     const cart_params& params, rng& g);

// --- Random forest ---------------------------------------------------------------

struct forest_params {
    std::size_t n_trees = 500;
    std::size_t mtry = 0; // 0 = floor(sqrt(p)) classification, floor(p/3) regression
    int max_depth = 30;
    std::size_t min_node = 5;
    bool classification = true;
};

struct random_forest {
    std::vector<decision_tree> trees;
    std::vector<double> feature_importance;
    bool classification = true;

    double predict_row(const matrix& x, std::size_t row) const {
        double s = 0.0;
        for (const auto& t : trees) s += t.predict_row(x, row);
        return trees.empty() ? 0.0 : s / static_cast<double>(trees.size());
    }
};

// Bagged CART; per-tree seeds derive from (seed, tree ordinal) so growing is
// parallelizable without changing results.
random_forest fit_random_forest(const matrix& x, const std::vector<double>& y,
                                const std::vector<double>& weights, const forest_params& params,
                                std::uint64_t seed, int threads = 1);

// --- Stochastic gradient boosting (logistic loss) ----------------------------------

struct gbm_params {
    std::size_t n_trees = 100;
    int interaction_depth = 2;
    double shrinkage = 0.1;
    std::size_t min_obs_in_node = 10;
};

struct gbm_model {
    double f0 = 0.0;
    double shrinkage = 0.1;
    std::vector<decision_tree> trees;
    std::vector<double> train_log_loss; // after every stage
    std::vector<double> feature_importance;

    double score_row(const matrix& x, std::size_t row, std::size_t upto_trees) const {
        double f = f0;
        std::size_t m = std::min(upto_trees, trees.size());
        for (std::size_t t = 0; t < m; ++t) f += shrinkage * trees[t].predict_row(x, row);
        return f;
    }
    double predict_row(const matrix& x, std::size_t row) const;
};

// Stagewise fit of depth-limited regression trees to the negative gradient of
// the logistic log-loss, each stage scaled by the shrinkage. Leaf values are
// Newton steps.
gbm_model fit_gbm(const matrix& x, const std::vector<double>& y, const std::vector<double>& weights,
                  const gbm_params& params, std::uint64_t seed);

} // namespace clinpred
