#pragma once

#include <string>
#include <vector>

#include "clinpred/config.hpp"
#include "clinpred/eval.hpp"
#include "clinpred/models.hpp"
#include "clinpred/select.hpp"

namespace clinpred {

struct model_summary {
    algorithm algo = algorithm::glm_logistic;
    std::string best_hyper;
    double mean_metric = 0.0;
    double sd_metric = 0.0;
    std::vector<double> per_resample; // winning point, one value per usable resample
};

// Ordered record of what the run touched; the leakage tests assert that the
// test partition is first read only after the final model is frozen.
struct run_trace {
    std::vector<std::string> events;
    void add(std::string e) { events.push_back(std::move(e)); }
};

struct run_report {
    endpoint_mode task = endpoint_mode::classification;
    bool single_cohort = false; // evaluate-only runs have no training side
    std::size_t n_train = 0, n_test = 0;
    balance_check balance;
    sample_size_advice size_advice;

    bool rfe_ran = false;
    rfe_result rfe;

    std::vector<model_summary> comparison;
    std::size_t selected = 0; // index into comparison
    double resampled_train_metric = 0.0;
    double cutoff = 0.5;

    discrimination_report train_discrimination, test_discrimination;
    calibration_report train_calibration, test_calibration;
    regression_report train_regression, test_regression;
    overfit_verdict overfit;

    importance_report importance;
    std::vector<std::string> notes;
    std::vector<std::pair<std::string, std::string>> manifest; // file name, checksum

    // audits collected from every per-model tuning run, for leakage checks
    std::vector<resample_audit> audits;
};

// generate -> split -> (optional RFE) -> tuned training per model ->
// comparison -> final model frozen on training data only -> one-shot test
// evaluation -> files written.
run_report cmd_run(const pipeline_config& cfg, run_trace* trace = nullptr);

// Prediction CSV for a saved model: probability/label or value, plus
// extrapolation and imputed-field columns.
void cmd_predict(const std::string& model_path, const std::string& csv_path,
                 const std::string& out_path);

// Evaluation of a saved model against a labeled CSV; writes metrics and plots.
run_report cmd_evaluate(const std::string& model_path, const std::string& csv_path,
                        const std::string& out_dir, bool emit_plots = true);

dataset load_pipeline_input(const pipeline_config& cfg);

// report emission used by cmd_run/cmd_evaluate; returns (file, checksum) pairs
std::vector<std::pair<std::string, std::string>> emit_report_files(const run_report& rep,
                                                                   const pipeline_config& cfg,
                                                                   const std::vector<roc_point>& roc,
                                                                   const std::vector<std::pair<double, double>>& qq,
                                                                   const std::string& dir);

} // namespace clinpred
