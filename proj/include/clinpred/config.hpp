#pragma once

#include <string>
#include <vector>

#include "clinpred/data.hpp"
#include "clinpred/models.hpp"
#include "clinpred/preprocess.hpp"
#include "clinpred/resample.hpp"

namespace clinpred {

struct cutoff_policy {
    enum class kind { fixed, balanced, rule_in, rule_out };
    kind mode = kind::fixed;
    double fixed_value = 0.5;
    double target = 0.9; // rule_in / rule_out
};

struct model_request {
    algorithm algo = algorithm::glm_logistic;
    std::vector<hyper_point> grid;    // empty = default grid
    std::vector<double> enet_alphas;  // elastic net only, empty = default set
};

struct pipeline_config {
    // input: either a CSV path or a generator request
    std::string data_path;
    std::size_t generate_n = 0;
    generator_spec generator = generator_spec::defaults();

    endpoint_mode task = endpoint_mode::classification;
    std::string outcome;
    std::vector<std::string> drop;

    double split_fraction = 0.8;
    std::uint64_t seed = 123;
    int threads = 1;
    std::string out_dir = "out";
    bool emit_plots = true;

    recipe_config recipe;
    balance_strategy balance;

    bool rfe = false;
    std::vector<std::size_t> rfe_sizes;
    algorithm rfe_estimator = algorithm::glm_logistic;
    resampling_plan rfe_plan{resample_kind::bootstrap, 25, 0};

    resampling_plan plan{resample_kind::bootstrap, 25, 0};
    tune_metric metric = tune_metric::roc;
    std::vector<model_request> models;

    cutoff_policy cutoff;
};

// Flat `key = value` text file; '#' starts a comment. The full key set is
// documented in the README.
pipeline_config parse_config_text(const std::string& text);
pipeline_config load_config(const std::string& path);

} // namespace clinpred
