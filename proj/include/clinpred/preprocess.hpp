#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "clinpred/data.hpp"

namespace clinpred {

// --- Scaling ----------------------------------------------------------------

enum class scaler_mode { zscore, minmax };

struct scaler {
    scaler_mode mode = scaler_mode::zscore;
    std::vector<std::string> columns;
    std::vector<double> center; // mean or min
    std::vector<double> scale;  // sample sd (n-1) or max-min
    std::vector<std::uint8_t> constant; // flagged columns map to 0 on apply
};

scaler fit_scaler(const dataset& train, const std::vector<std::string>& cols, scaler_mode mode);
dataset apply_scaler(const scaler& s, const dataset& ds);

// --- One-hot encoding ---------------------------------------------------------

struct one_hot_map {
    std::string source;          // empty levels => identity map (binary passthrough)
    std::vector<int> levels;
    std::vector<std::string> produced;
};

struct one_hot_result {
    dataset data;
    one_hot_map map;
    std::vector<std::uint32_t> flagged_rows; // rows carrying a level absent from the map
};

one_hot_result one_hot_encode(const dataset& ds, const std::string& col);
one_hot_result apply_one_hot(const one_hot_map& map, const dataset& ds);

// --- kNN imputation ------------------------------------------------------------

// Mixed-type distance: squared difference on z-scaled continuous columns,
// 0/1 mismatch on binary/categorical, averaged over mutually observed
// feature columns. Neighbor ties break toward the lowest reference row.
struct knn_imputer {
    std::size_t k = 5;
    dataset reference;               // training rows only
    std::vector<double> center;      // per-column z stats for the distance
    std::vector<double> scale;
    std::vector<std::size_t> missing_per_column; // reported at fit time
};

knn_imputer fit_knn_imputer(const dataset& train, std::size_t k = 5);

struct impute_result {
    dataset data;
    std::vector<std::vector<std::string>> imputed_fields; // per row, columns that were filled
};

impute_result impute(const knn_imputer& imp, const dataset& ds);

// --- Class rebalancing ----------------------------------------------------------

enum class balance_kind { none, upsample, downsample, smote, class_weights };

struct balance_strategy {
    balance_kind kind = balance_kind::none;
    std::size_t smote_k = 5;
    double weight_negative = 1.0, weight_positive = 1.0; // class_weights only
};

struct rebalance_result {
    dataset data;
    std::vector<double> row_weights; // non-empty only for class_weights
};

rebalance_result rebalance(const dataset& train, const balance_strategy& strategy, std::uint64_t seed);

// --- Recipe: impute -> one-hot -> scale, balance last and training-only ----------

struct recipe_config {
    bool impute = true;
    std::size_t impute_k = 5;
    bool one_hot = true;            // expands categorical columns with >= 3 levels
    bool scale = true;
    scaler_mode scale_mode = scaler_mode::zscore;
    balance_strategy balance;
};

struct recipe {
    recipe_config config;
    bool has_imputer = false;
    knn_imputer imputer;                      // fitted on the feature columns only
    std::vector<one_hot_map> one_hot_maps;
    bool has_scaler = false;
    scaler scale;
    std::vector<column_spec> input_specs;     // feature schema the recipe was fitted on
    std::vector<std::uint32_t> fit_row_ids;   // provenance of every row the statistics saw
    std::uint64_t fingerprint = 0;            // hash of fit_row_ids
};

// Feature columns of `ds` matched by name against `wanted` (order and kinds
// from `wanted`); throws SchemaMismatch naming the first absent column.
dataset project_features(const dataset& ds, const std::vector<column_spec>& wanted);

recipe fit_recipe(const dataset& train, const recipe_config& config);

struct applied_recipe {
    dataset data;
    std::vector<double> row_weights;                        // class_weights strategy only
    std::vector<std::vector<std::string>> imputed_fields;   // per input row
    std::vector<std::uint32_t> unknown_level_rows;
};

// Balancing happens only when is_training is set; assessment data always
// passes through untouched statistics.
applied_recipe apply_recipe(const recipe& r, const dataset& ds, bool is_training,
                            std::uint64_t seed = 0);

} // namespace clinpred
