#pragma once

#include <string>
#include <utility>
#include <vector>

#include "clinpred/eval.hpp"
#include "clinpred/select.hpp"

namespace clinpred {

// Self-contained 800x600 SVG plots, emitted directly so reports need no
// plotting runtime. Output is byte-deterministic for identical inputs.

std::string svg_roc_plot(const std::vector<roc_point>& curve, double auc_value);
std::string svg_calibration_plot(const std::vector<calibration_bin>& bins, double intercept,
                                 double slope);
// one bar per model: (label, value)
std::string svg_comparison_plot(const std::vector<std::pair<std::string, double>>& bars,
                                const std::string& metric_label);
std::string svg_rfe_profile(const std::vector<std::size_t>& sizes, const std::vector<double>& profile,
                            const std::string& metric_label);
std::string svg_importance_plot(const importance_report& imp);
std::string svg_qq_plot(const std::vector<std::pair<double, double>>& points);

} // namespace clinpred
