#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clinpred/data.hpp"

namespace clinpred {

// --- Discrimination -----------------------------------------------------------

struct confusion_matrix {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::size_t positives() const { return tp + fn; }
    std::size_t negatives() const { return tn + fp; }
    std::size_t total() const { return tp + fp + tn + fn; }
};

// Rank-based (Mann-Whitney) AUC; ties count one half.
double auc(const std::vector<double>& probs, const std::vector<int>& labels);

// Predicted positive iff p > cutoff (strictly).
confusion_matrix confusion_at(const std::vector<double>& probs, const std::vector<int>& labels,
                              double cutoff = 0.5);

struct discrimination_report {
    double auc = 0.0;
    double accuracy = 0.0, sensitivity = 0.0, specificity = 0.0;
    double ppv = 0.0, npv = 0.0, f1 = 0.0;
    double cutoff = 0.5;
    // zero-denominator metrics are reported undefined rather than thrown
    bool ppv_defined = true, npv_defined = true, f1_defined = true;
    bool sensitivity_defined = true, specificity_defined = true;
};

discrimination_report make_discrimination_report(const confusion_matrix& cm, double auc_value,
                                                 double cutoff = 0.5);

struct roc_point {
    double fpr = 0.0; // 1 - specificity
    double tpr = 0.0; // sensitivity
    double cutoff = 0.0;
};

std::vector<roc_point> roc_curve(const std::vector<double>& probs, const std::vector<int>& labels);

enum class cutoff_mode { balanced, rule_in, rule_out };

// balanced: closest-to-(0,1) over candidate cutoffs (midpoints of adjacent
// distinct scores plus 0 and 1). rule_in: smallest cutoff with specificity >=
// target; rule_out: largest cutoff with sensitivity >= target. A
// training-data-only operation by contract.
double optimal_cutoff(const std::vector<double>& probs, const std::vector<int>& labels,
                      cutoff_mode mode, std::optional<double> target = std::nullopt);

// --- Calibration ----------------------------------------------------------------

struct calibration_bin {
    double mean_predicted = 0.0;
    double observed_fraction = 0.0;
    std::size_t count = 0;
};

struct calibration_report {
    double intercept = 0.0; // calibration-in-the-large
    double slope = 0.0;
    double brier = 0.0;
    double eo_ratio = 0.0;
    double eci = 0.0; // grouped, scaled 0..100
    double hl_stat = 0.0;
    double hl_p = 0.0;
    std::string hl_note;
    std::vector<calibration_bin> bins;
};

calibration_report make_calibration_report(const std::vector<double>& probs,
                                           const std::vector<int>& labels, std::size_t groups = 10);

// Chi-square goodness of fit over g equal-count groups, df = g - 2.
struct hl_result {
    double statistic = 0.0;
    double p_value = 0.0;
    bool merged_groups = false;
    std::string note; // interpretation guidance: p > 0.2 is usually read as fair calibration
};
hl_result hosmer_lemeshow(const std::vector<double>& probs, const std::vector<int>& labels,
                          std::size_t groups = 10);

// Regularized incomplete gamma, both evaluation routes exposed so they can be
// cross-checked: series for the P form, continued fraction for Q.
double gamma_p_series(double a, double x);
double gamma_q_continued_fraction(double a, double x);
double chi_square_sf(double statistic, double df);

// --- Recalibration -----------------------------------------------------------------

enum class recalibration_method { intercept_update, platt, isotonic };

struct recalibrator {
    recalibration_method method = recalibration_method::intercept_update;
    double intercept = 0.0; // intercept_update: c; platt: a
    double slope = 1.0;     // platt: b
    std::vector<double> iso_breakpoints; // isotonic step function, flat beyond range
    std::vector<double> iso_levels;
};

recalibrator fit_recalibrator(const std::vector<double>& probs, const std::vector<int>& labels,
                              recalibration_method method);
std::vector<double> apply_recalibrator(const recalibrator& r, const std::vector<double>& probs);

// Pool-adjacent-violators on (x, y, w) sorted by x: the monotone
// non-decreasing least-squares fit.
std::vector<double> pava_fit(const std::vector<double>& y, const std::vector<double>& weights = {});

// --- Regression ---------------------------------------------------------------------

struct regression_report {
    double rmse = 0.0;
    double mae = 0.0;
    double r2 = 0.0;
    bool r2_defined = true;
};

regression_report make_regression_report(const std::vector<double>& preds,
                                         const std::vector<double>& trues);

// q paired empirical quantiles (type-7 interpolation), predicted then true.
std::vector<std::pair<double, double>> qq_points(const std::vector<double>& preds,
                                                 const std::vector<double>& trues, std::size_t q = 100);

// --- Diagnostics ----------------------------------------------------------------------

enum class metric_direction { higher_is_better, lower_is_better };

struct overfit_verdict {
    double gap = 0.0; // positive = worse generalization
    bool relevant_overfit = false;
};

overfit_verdict overfit_gap(double train_metric, double test_metric, metric_direction kind,
                            double threshold = 0.05);

struct feature_range {
    std::string name;
    feature_kind kind = feature_kind::continuous;
    double lo = 0.0, hi = 0.0;
    std::vector<int> levels;
};

// Offending feature names per row: continuous outside [train min, train max]
// or unseen categorical level.
std::vector<std::vector<std::string>> extrapolation_flags(const std::vector<feature_range>& ranges,
                                                          const dataset& ds);

} // namespace clinpred
