#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "clinpred/data.hpp"
#include "clinpred/eval.hpp"
#include "clinpred/linalg.hpp"
#include "clinpred/preprocess.hpp"
#include "clinpred/resample.hpp"
#include "clinpred/tree.hpp"

namespace clinpred {

enum class algorithm {
    glm_logistic,
    glm_linear,
    ridge,
    lasso,
    elastic_net,
    naive_bayes,
    knn,
    random_forest,
    gbm,
};

const char* algorithm_name(algorithm a);
algorithm algorithm_from_name(const std::string& name);
// interpretability order used for tie-breaking between model families
int algorithm_simplicity_rank(algorithm a);
bool algorithm_supports(algorithm a, endpoint_mode mode);

// One grid point; only the fields of the owning algorithm are meaningful.
struct hyper_point {
    double lambda = 0.0;
    double alpha = 1.0;
    std::size_t mtry = 0;
    std::size_t n_trees = 0;
    int depth = 0;
    double shrinkage = 0.1;
    std::size_t min_obs = 10;
    double laplace = 0.0;
    bool use_kernel = false;
    double adjust = 1.0;
    std::size_t k = 0;

    std::string describe(algorithm a) const;
};

struct estimator_spec {
    algorithm algo = algorithm::glm_logistic;
    std::vector<hyper_point> grid; // empty = default grid, resolved against the data

    static estimator_spec with_defaults(algorithm a);
};

void validate_hyper(algorithm a, const hyper_point& h, std::size_t p);

// Grid resolution; lasso/elastic-net lambda paths need the training data.
std::vector<hyper_point> default_grid(algorithm a, endpoint_mode mode, const dataset& design_train);

// --- Fitted parameter payloads -----------------------------------------------------

struct linear_params {
    bool logistic = false;
    std::vector<double> beta; // [intercept, one per design column]
};

struct nb_feature {
    bool continuous = true;
    double mean[2] = {0, 0}, sd[2] = {1, 1};
    std::vector<double> kernel_values[2]; // sorted, usekernel only
    double bandwidth[2] = {1, 1};
    std::vector<int> levels;
    std::vector<double> level_log_prob[2];
};

struct nb_params {
    double prior[2] = {0.5, 0.5};
    bool use_kernel = false;
    std::vector<nb_feature> features;
};

struct knn_params {
    std::size_t k = 5;
    matrix reference;
    std::vector<double> ref_outcome;
    std::vector<double> ref_weight;
    std::vector<std::uint8_t> is_continuous; // per design column
    std::vector<double> center, scale;       // distance standardization
};

struct forest_params_fitted {
    random_forest forest;
};

struct gbm_params_fitted {
    gbm_model model;
};

using model_params =
    std::variant<linear_params, nb_params, knn_params, forest_params_fitted, gbm_params_fitted>;

// A frozen model: parameters, the co-trained recipe, the raw-feature training
// ranges for extrapolation checks, and the classification cutoff.
struct fitted_model {
    int format_version = 1;
    algorithm algo = algorithm::glm_logistic;
    hyper_point hyper;
    endpoint_mode mode = endpoint_mode::classification;
    model_params params;
    recipe rec;
    std::vector<std::string> design_columns; // transformed feature names the params expect
    std::vector<feature_range> ranges;
    double cutoff = 0.5;
    std::string outcome_name;
};

// Raw fit on an already-transformed design (features + outcome last).
model_params fit_model_params(algorithm a, const hyper_point& h, const dataset& design,
                              const std::vector<double>& row_weights, std::uint64_t seed,
                              int threads = 1);

// Probability of the positive class (classification) or predicted value
// (regression) per transformed row.
std::vector<double> score_design(algorithm a, const model_params& params, const dataset& design,
                                 endpoint_mode mode);

struct predictions {
    std::vector<double> probability; // classification only
    std::vector<int> label;
    std::vector<double> value; // regression only
    std::vector<std::vector<std::string>> extrapolation;
    std::vector<std::vector<std::string>> imputed_fields;
};

predictions predict(const fitted_model& m, const dataset& ds);

// --- Resampled grid tuning -----------------------------------------------------------

enum class tune_metric { roc, rmse };

struct train_control {
    resampling_plan plan;
    tune_metric metric = tune_metric::roc;
    balance_strategy balance;
    recipe_config recipe_cfg;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct resample_audit {
    std::vector<std::uint32_t> fit_row_ids;        // rows the recipe statistics saw
    std::vector<std::uint32_t> assessment_row_ids; // rows the metric was computed on
    std::uint64_t recipe_fingerprint = 0;
};

struct trained_result {
    fitted_model best;
    std::vector<hyper_point> grid;
    matrix metric_table; // grid.size() x resamples; NaN marks a skipped pair
    std::vector<double> metric_mean;
    std::size_t best_index = 0;
    std::vector<resample_audit> audits;
    std::string selection_note;
};

// For each resample and grid point: recipe fitted on the analysis rows, model
// fitted on the transformed (balanced) analysis rows, metric computed on the
// transformed assessment rows. The best point is refitted on all training
// rows. Deterministic per seed and independent of the worker count.
trained_result train_tuned(const dataset& train, const estimator_spec& spec, const train_control& ctrl);

// Training min/max (continuous) and level sets (binary/categorical) in raw
// feature space.
std::vector<feature_range> compute_feature_ranges(const dataset& train);

} // namespace clinpred
