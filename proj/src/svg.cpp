#include "clinpred/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace clinpred {

namespace {

constexpr double kWidth = 800.0, kHeight = 600.0;
constexpr double kMarginLeft = 80.0, kMarginRight = 30.0, kMarginTop = 50.0, kMarginBottom = 70.0;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

struct axes {
    double x_lo, x_hi, y_lo, y_hi;

    double px(double x) const {
        return kMarginLeft + (x - x_lo) / (x_hi - x_lo) * (kWidth - kMarginLeft - kMarginRight);
    }
    double py(double y) const {
        return kHeight - kMarginBottom -
               (y - y_lo) / (y_hi - y_lo) * (kHeight - kMarginTop - kMarginBottom);
    }
};

std::string header() {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" "
           "font-family=\"sans-serif\">\n"
           "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
}

std::string title(const std::string& text) {
    return "<text x=\"400\" y=\"28\" text-anchor=\"middle\" font-size=\"18\">" + text + "</text>\n";
}

std::string frame_with_ticks(const axes& a, const std::string& x_label, const std::string& y_label,
                             int ticks = 5) {
    std::string out;
    out += "<rect x=\"" + num(kMarginLeft) + "\" y=\"" + num(kMarginTop) + "\" width=\"" +
           num(kWidth - kMarginLeft - kMarginRight) + "\" height=\"" +
           num(kHeight - kMarginTop - kMarginBottom) + "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= ticks; ++i) {
        double fx = a.x_lo + (a.x_hi - a.x_lo) * i / ticks;
        double fy = a.y_lo + (a.y_hi - a.y_lo) * i / ticks;
        out += "<line x1=\"" + num(a.px(fx)) + "\" y1=\"" + num(kHeight - kMarginBottom) + "\" x2=\"" +
               num(a.px(fx)) + "\" y2=\"" + num(kHeight - kMarginBottom + 6) + "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + num(a.px(fx)) + "\" y=\"" + num(kHeight - kMarginBottom + 22) +
               "\" text-anchor=\"middle\" font-size=\"12\">" + num(fx) + "</text>\n";
        out += "<line x1=\"" + num(kMarginLeft - 6) + "\" y1=\"" + num(a.py(fy)) + "\" x2=\"" +
               num(kMarginLeft) + "\" y2=\"" + num(a.py(fy)) + "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + num(kMarginLeft - 10) + "\" y=\"" + num(a.py(fy) + 4) +
               "\" text-anchor=\"end\" font-size=\"12\">" + num(fy) + "</text>\n";
    }
    out += "<text x=\"" + num((kMarginLeft + kWidth - kMarginRight) / 2) + "\" y=\"" +
           num(kHeight - 20) + "\" text-anchor=\"middle\" font-size=\"14\">" + x_label + "</text>\n";
    out += "<text x=\"22\" y=\"" + num((kMarginTop + kHeight - kMarginBottom) / 2) +
           "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 22 " +
           num((kMarginTop + kHeight - kMarginBottom) / 2) + ")\">" + y_label + "</text>\n";
    return out;
}

std::string polyline(const axes& a, const std::vector<std::pair<double, double>>& pts,
                     const std::string& color, double width = 2.0) {
    std::string out = "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" + num(width) +
                      "\" points=\"";
    for (const auto& [x, y] : pts) out += num(a.px(x)) + "," + num(a.py(y)) + " ";
    out += "\"/>\n";
    return out;
}

std::string diagonal(const axes& a) {
    return "<line x1=\"" + num(a.px(a.x_lo)) + "\" y1=\"" + num(a.py(a.y_lo)) + "\" x2=\"" +
           num(a.px(a.x_hi)) + "\" y2=\"" + num(a.py(a.y_hi)) +
           "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
}

} // namespace

std::string svg_roc_plot(const std::vector<roc_point>& curve, double auc_value) {
    axes a{0.0, 1.0, 0.0, 1.0};
    std::string out = header();
    out += title("Receiver operating characteristic");
    out += frame_with_ticks(a, "1 - Specificity", "Sensitivity");
    out += diagonal(a);
    std::vector<std::pair<double, double>> pts;
    pts.reserve(curve.size());
    for (const auto& p : curve) pts.emplace_back(p.fpr, p.tpr);
    out += polyline(a, pts, "#1f77b4");
    out += "<text x=\"" + num(a.px(0.6)) + "\" y=\"" + num(a.py(0.12)) +
           "\" font-size=\"16\">AUC = " + num(auc_value) + "</text>\n";
    return out + "</svg>\n";
}

std::string svg_calibration_plot(const std::vector<calibration_bin>& bins, double intercept,
                                 double slope) {
    axes a{0.0, 1.0, 0.0, 1.0};
    std::string out = header();
    out += title("Calibration plot");
    out += frame_with_ticks(a, "Mean predicted probability", "Observed proportion");
    out += diagonal(a);
    // smoothed curve: 3-bin moving average over the bin points
    std::vector<std::pair<double, double>> pts;
    for (const auto& b : bins)
        if (b.count > 0) pts.emplace_back(b.mean_predicted, b.observed_fraction);
    std::vector<std::pair<double, double>> smooth;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double sx = 0.0, sy = 0.0;
        int n = 0;
        for (std::size_t j = i > 0 ? i - 1 : 0; j <= std::min(i + 1, pts.size() - 1); ++j) {
            sx += pts[j].first;
            sy += pts[j].second;
            ++n;
        }
        smooth.emplace_back(sx / n, sy / n);
    }
    if (smooth.size() > 1) out += polyline(a, smooth, "#ff7f0e", 1.5);
    for (const auto& [x, y] : pts)
        out += "<circle cx=\"" + num(a.px(x)) + "\" cy=\"" + num(a.py(y)) +
               "\" r=\"5\" fill=\"#1f77b4\"/>\n";
    out += "<text x=\"" + num(a.px(0.05)) + "\" y=\"" + num(a.py(0.93)) +
           "\" font-size=\"14\">intercept = " + num(intercept) + ", slope = " + num(slope) +
           "</text>\n";
    return out + "</svg>\n";
}

std::string svg_comparison_plot(const std::vector<std::pair<std::string, double>>& bars,
                                const std::string& metric_label) {
    double hi = 0.0;
    for (const auto& [_, v] : bars) hi = std::max(hi, v);
    if (hi <= 0.0) hi = 1.0;
    axes a{0.0, static_cast<double>(bars.size()), 0.0, hi * 1.15};
    std::string out = header();
    out += title("Model comparison (" + metric_label + ")");
    out += frame_with_ticks(a, "", metric_label);
    double band = (kWidth - kMarginLeft - kMarginRight) / std::max<std::size_t>(bars.size(), 1);
    for (std::size_t i = 0; i < bars.size(); ++i) {
        double x0 = kMarginLeft + band * (static_cast<double>(i) + 0.2);
        double w = band * 0.6;
        double y0 = a.py(bars[i].second);
        out += "<rect x=\"" + num(x0) + "\" y=\"" + num(y0) + "\" width=\"" + num(w) + "\" height=\"" +
               num(kHeight - kMarginBottom - y0) + "\" fill=\"#1f77b4\"/>\n";
        out += "<text x=\"" + num(x0 + w / 2) + "\" y=\"" + num(kHeight - kMarginBottom + 22) +
               "\" text-anchor=\"middle\" font-size=\"13\">" + bars[i].first + "</text>\n";
        out += "<text x=\"" + num(x0 + w / 2) + "\" y=\"" + num(y0 - 6) +
               "\" text-anchor=\"middle\" font-size=\"12\">" + num(bars[i].second) + "</text>\n";
    }
    return out + "</svg>\n";
}

std::string svg_rfe_profile(const std::vector<std::size_t>& sizes, const std::vector<double>& profile,
                            const std::string& metric_label) {
    double lo = 1e308, hi = -1e308;
    for (double v : profile) {
        if (std::isnan(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    double pad = (hi - lo) * 0.1;
    axes a{static_cast<double>(sizes.front()), static_cast<double>(sizes.back()), lo - pad, hi + pad};
    std::string out = header();
    out += title("Recursive feature elimination profile");
    out += frame_with_ticks(a, "Number of features", metric_label);
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < sizes.size(); ++i)
        if (!std::isnan(profile[i])) pts.emplace_back(static_cast<double>(sizes[i]), profile[i]);
    out += polyline(a, pts, "#1f77b4");
    for (const auto& [x, y] : pts)
        out += "<circle cx=\"" + num(a.px(x)) + "\" cy=\"" + num(a.py(y)) +
               "\" r=\"4\" fill=\"#1f77b4\"/>\n";
    return out + "</svg>\n";
}

std::string svg_importance_plot(const importance_report& imp) {
    std::vector<importance_entry> entries = imp.entries;
    std::stable_sort(entries.begin(), entries.end(),
                     [](const importance_entry& l, const importance_entry& r) { return l.scaled > r.scaled; });
    std::string out = header();
    out += title("Variable importance (scaled 0-100)");
    double row_h = (kHeight - kMarginTop - kMarginBottom) / std::max<std::size_t>(entries.size(), 1);
    double plot_w = kWidth - kMarginLeft - kMarginRight - 120.0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        double y = kMarginTop + row_h * static_cast<double>(i);
        double w = plot_w * entries[i].scaled / 100.0;
        out += "<text x=\"" + num(kMarginLeft + 110.0) + "\" y=\"" + num(y + row_h * 0.65) +
               "\" text-anchor=\"end\" font-size=\"12\">" + entries[i].feature + "</text>\n";
        out += "<rect x=\"" + num(kMarginLeft + 120.0) + "\" y=\"" + num(y + row_h * 0.2) +
               "\" width=\"" + num(std::max(w, 0.5)) + "\" height=\"" + num(row_h * 0.6) +
               "\" fill=\"#1f77b4\"/>\n";
        out += "<text x=\"" + num(kMarginLeft + 126.0 + w) + "\" y=\"" + num(y + row_h * 0.65) +
               "\" font-size=\"11\">" + num(entries[i].scaled) + "</text>\n";
    }
    return out + "</svg>\n";
}

std::string svg_qq_plot(const std::vector<std::pair<double, double>>& points) {
    double lo = 1e308, hi = -1e308;
    for (const auto& [x, y] : points) {
        lo = std::min({lo, x, y});
        hi = std::max({hi, x, y});
    }
    if (!(hi > lo)) {
        lo -= 1.0;
        hi += 1.0;
    }
    double pad = (hi - lo) * 0.05;
    axes a{lo - pad, hi + pad, lo - pad, hi + pad};
    std::string out = header();
    out += title("Quantile-quantile plot");
    out += frame_with_ticks(a, "Predicted quantiles", "Observed quantiles");
    out += diagonal(a);
    for (const auto& [x, y] : points)
        out += "<circle cx=\"" + num(a.px(x)) + "\" cy=\"" + num(a.py(y)) +
               "\" r=\"3\" fill=\"#1f77b4\"/>\n";
    return out + "</svg>\n";
}

} // namespace clinpred
