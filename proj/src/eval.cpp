#include "clinpred/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "clinpred/error.hpp"
#include "clinpred/solvers.hpp"

namespace clinpred {

namespace {

void require_both_classes(const std::vector<int>& labels) {
    bool pos = false, neg = false;
    for (int y : labels) (y ? pos : neg) = true;
    if (!pos || !neg) throw error(errc::single_class, "need both classes");
}

double clip_prob(double p) { return std::clamp(p, 1e-10, 1.0 - 1e-10); }
double logit(double p) { return std::log(p / (1.0 - p)); }

} // namespace

double auc(const std::vector<double>& probs, const std::vector<int>& labels) {
    require_both_classes(labels);
    const std::size_t n = probs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return probs[a] < probs[b]; });

    // midranks handle ties exactly
    std::vector<double> rank(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && probs[order[j + 1]] == probs[order[i]]) ++j;
        double mid = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
        i = j + 1;
    }
    double rank_sum_pos = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (labels[k]) {
            rank_sum_pos += rank[k];
            ++n_pos;
        }
    }
    std::size_t n_neg = n - n_pos;
    double u = rank_sum_pos - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

confusion_matrix confusion_at(const std::vector<double>& probs, const std::vector<int>& labels,
                              double cutoff) {
    confusion_matrix cm;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        bool predicted = probs[i] > cutoff;
        if (labels[i]) {
            predicted ? ++cm.tp : ++cm.fn;
        } else {
            predicted ? ++cm.fp : ++cm.tn;
        }
    }
    return cm;
}

discrimination_report make_discrimination_report(const confusion_matrix& cm, double auc_value,
                                                 double cutoff) {
    discrimination_report rep;
    rep.auc = auc_value;
    rep.cutoff = cutoff;
    const double n = static_cast<double>(cm.total());
    rep.accuracy = n > 0 ? static_cast<double>(cm.tp + cm.tn) / n : 0.0;
    if (cm.positives() > 0) rep.sensitivity = static_cast<double>(cm.tp) / static_cast<double>(cm.positives());
    else rep.sensitivity_defined = false;
    if (cm.negatives() > 0) rep.specificity = static_cast<double>(cm.tn) / static_cast<double>(cm.negatives());
    else rep.specificity_defined = false;
    if (cm.tp + cm.fp > 0) rep.ppv = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
    else rep.ppv_defined = false;
    if (cm.tn + cm.fn > 0) rep.npv = static_cast<double>(cm.tn) / static_cast<double>(cm.tn + cm.fn);
    else rep.npv_defined = false;
    if (rep.ppv_defined && rep.sensitivity_defined && rep.ppv + rep.sensitivity > 0.0)
        rep.f1 = 2.0 * rep.ppv * rep.sensitivity / (rep.ppv + rep.sensitivity);
    else rep.f1_defined = false;
    return rep;
}

namespace {

// candidate cutoffs: midpoints of adjacent distinct sorted scores, plus 0 and 1
std::vector<double> candidate_cutoffs(const std::vector<double>& probs) {
    std::vector<double> sorted(probs);
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<double> cuts;
    cuts.push_back(0.0);
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
        cuts.push_back(0.5 * (sorted[i] + sorted[i + 1]));
    cuts.push_back(1.0);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    return cuts;
}

} // namespace

std::vector<roc_point> roc_curve(const std::vector<double>& probs, const std::vector<int>& labels) {
    require_both_classes(labels);
    std::vector<roc_point> pts;
    for (double cut : candidate_cutoffs(probs)) {
        confusion_matrix cm = confusion_at(probs, labels, cut);
        roc_point pt;
        pt.cutoff = cut;
        pt.tpr = static_cast<double>(cm.tp) / static_cast<double>(cm.positives());
        pt.fpr = 1.0 - static_cast<double>(cm.tn) / static_cast<double>(cm.negatives());
        pts.push_back(pt);
    }
    std::sort(pts.begin(), pts.end(), [](const roc_point& a, const roc_point& b) {
        if (a.fpr != b.fpr) return a.fpr < b.fpr;
        return a.tpr < b.tpr;
    });
    return pts;
}

double optimal_cutoff(const std::vector<double>& probs, const std::vector<int>& labels,
                      cutoff_mode mode, std::optional<double> target) {
    require_both_classes(labels);
    std::vector<double> cuts = candidate_cutoffs(probs);

    if (mode == cutoff_mode::balanced) {
        double best_cut = cuts.front();
        double best_obj = std::numeric_limits<double>::infinity();
        for (double cut : cuts) {
            confusion_matrix cm = confusion_at(probs, labels, cut);
            double sens = static_cast<double>(cm.tp) / static_cast<double>(cm.positives());
            double spec = static_cast<double>(cm.tn) / static_cast<double>(cm.negatives());
            double obj = (1.0 - sens) * (1.0 - sens) + (1.0 - spec) * (1.0 - spec);
            if (obj < best_obj - 1e-15) {
                best_obj = obj;
                best_cut = cut;
            }
        }
        return best_cut;
    }

    double want = target.value_or(0.9);
    if (mode == cutoff_mode::rule_in) {
        // smallest cutoff achieving specificity >= target
        for (double cut : cuts) {
            confusion_matrix cm = confusion_at(probs, labels, cut);
            double spec = static_cast<double>(cm.tn) / static_cast<double>(cm.negatives());
            if (spec >= want) return cut;
        }
        throw error(errc::target_unachievable, "no cutoff reaches the specificity target");
    }
    // rule_out: largest cutoff achieving sensitivity >= target
    for (auto it = cuts.rbegin(); it != cuts.rend(); ++it) {
        confusion_matrix cm = confusion_at(probs, labels, *it);
        double sens = static_cast<double>(cm.tp) / static_cast<double>(cm.positives());
        if (sens >= want) return *it;
    }
    throw error(errc::target_unachievable, "no cutoff reaches the sensitivity target");
}

// --- Calibration ---------------------------------------------------------------------

namespace {

// g near-equal groups over the sample sorted by predicted probability
std::vector<std::vector<std::size_t>> probability_groups(const std::vector<double>& probs,
                                                         std::size_t g) {
    const std::size_t n = probs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return probs[a] < probs[b]; });
    std::vector<std::vector<std::size_t>> groups(g);
    for (std::size_t k = 0; k < g; ++k) {
        std::size_t lo = k * n / g, hi = (k + 1) * n / g;
        groups[k].assign(order.begin() + static_cast<long>(lo), order.begin() + static_cast<long>(hi));
    }
    return groups;
}

// logistic refit of labels on logit(p): free slope, or slope pinned at 1 via offset
void calibration_refit(const std::vector<double>& probs, const std::vector<int>& labels,
                       double& intercept_out, double& slope_out) {
    const std::size_t n = probs.size();
    std::vector<double> lp(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        lp[i] = logit(clip_prob(probs[i]));
        y[i] = labels[i];
    }
    {
        matrix x(n, 2);
        for (std::size_t i = 0; i < n; ++i) {
            x(i, 0) = 1.0;
            x(i, 1) = lp[i];
        }
        irls_result fit = irls_logistic(x, y);
        slope_out = fit.beta[1];
    }
    {
        matrix x(n, 1);
        for (std::size_t i = 0; i < n; ++i) x(i, 0) = 1.0;
        irls_options opt;
        opt.offset = lp;
        irls_result fit = irls_logistic(x, y, opt);
        intercept_out = fit.beta[0];
    }
}

} // namespace

calibration_report make_calibration_report(const std::vector<double>& probs,
                                           const std::vector<int>& labels, std::size_t groups) {
    const std::size_t n = probs.size();
    if (n < groups) throw error(errc::too_few_rows, "need at least one row per calibration group");
    require_both_classes(labels);

    calibration_report rep;
    calibration_refit(probs, labels, rep.intercept, rep.slope);

    double brier = 0.0, sum_p = 0.0, sum_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = probs[i] - labels[i];
        brier += d * d;
        sum_p += probs[i];
        sum_y += labels[i];
    }
    rep.brier = brier / static_cast<double>(n);
    rep.eo_ratio = sum_p / sum_y;

    auto grp = probability_groups(probs, groups);
    double eci = 0.0;
    for (const auto& g : grp) {
        calibration_bin bin;
        bin.count = g.size();
        if (g.empty()) {
            rep.bins.push_back(bin);
            continue;
        }
        double sp = 0.0, sy = 0.0;
        for (std::size_t i : g) {
            sp += probs[i];
            sy += labels[i];
        }
        bin.mean_predicted = sp / static_cast<double>(g.size());
        bin.observed_fraction = sy / static_cast<double>(g.size());
        for (std::size_t i : g) {
            double d = probs[i] - bin.observed_fraction;
            eci += d * d;
        }
        rep.bins.push_back(bin);
    }
    rep.eci = 100.0 * eci / static_cast<double>(n);

    try {
        hl_result hl = hosmer_lemeshow(probs, labels, groups);
        rep.hl_stat = hl.statistic;
        rep.hl_p = hl.p_value;
        rep.hl_note = hl.note;
    } catch (const error&) {
        // degenerate groups (hard 0/1 predictions) leave the test undefined
        rep.hl_stat = std::numeric_limits<double>::quiet_NaN();
        rep.hl_p = std::numeric_limits<double>::quiet_NaN();
        rep.hl_note = "undefined: degenerate probability groups";
    }
    return rep;
}

hl_result hosmer_lemeshow(const std::vector<double>& probs, const std::vector<int>& labels,
                          std::size_t groups) {
    const std::size_t n = probs.size();
    if (n < 2 * groups) throw error(errc::too_few_rows, "need at least 2 rows per group");
    require_both_classes(labels);

    auto grp = probability_groups(probs, groups);
    hl_result res;
    double stat = 0.0;
    std::size_t used = 0;
    for (const auto& g : grp) {
        if (g.empty()) continue;
        double expected = 0.0, observed = 0.0;
        for (std::size_t i : g) {
            expected += probs[i];
            observed += labels[i];
        }
        double nk = static_cast<double>(g.size());
        double denom = expected * (1.0 - expected / nk);
        if (denom <= 0.0) {
            // degenerate group folded into the statistic's neighbors
            res.merged_groups = true;
            continue;
        }
        double d = observed - expected;
        stat += d * d / denom;
        ++used;
    }
    if (used < 3) throw error(errc::empty_expected, "too many degenerate groups");
    res.statistic = stat;
    res.p_value = chi_square_sf(stat, static_cast<double>(used) - 2.0);
    res.note = res.p_value > 0.2 ? "p > 0.2: consistent with fair calibration"
                                 : "p <= 0.2: calibration may be off";
    return res;
}

// --- Regularized incomplete gamma ------------------------------------------------------

double gamma_p_series(double a, double x) {
    if (x <= 0.0) return 0.0;
    double ap = a;
    double sum = 1.0 / a;
    double term = sum;
    for (int i = 0; i < 1000; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_continued_fraction(double a, double x) {
    // Lentz's algorithm for the continued-fraction form of Q(a, x)
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 1000; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double chi_square_sf(double statistic, double df) {
    if (statistic <= 0.0) return 1.0;
    double a = df / 2.0, x = statistic / 2.0;
    // series converges fast below a+1, the continued fraction above
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_continued_fraction(a, x);
}

// --- Recalibration ----------------------------------------------------------------------

std::vector<double> pava_fit(const std::vector<double>& y, const std::vector<double>& weights) {
    const std::size_t n = y.size();
    std::vector<double> level;
    std::vector<double> weight;
    std::vector<std::size_t> size;
    for (std::size_t i = 0; i < n; ++i) {
        level.push_back(y[i]);
        weight.push_back(weights.empty() ? 1.0 : weights[i]);
        size.push_back(1);
        // pool while the last two blocks violate monotonicity
        while (level.size() > 1 && level[level.size() - 2] > level.back() + 1e-15) {
            double w = weight[weight.size() - 2] + weight.back();
            double v = (level[level.size() - 2] * weight[weight.size() - 2] +
                        level.back() * weight.back()) / w;
            level.pop_back();
            weight.pop_back();
            std::size_t s = size.back();
            size.pop_back();
            level.back() = v;
            weight.back() = w;
            size.back() += s;
        }
    }
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t b = 0; b < level.size(); ++b)
        for (std::size_t k = 0; k < size[b]; ++k) out.push_back(level[b]);
    return out;
}

recalibrator fit_recalibrator(const std::vector<double>& probs, const std::vector<int>& labels,
                              recalibration_method method) {
    require_both_classes(labels);
    recalibrator r;
    r.method = method;
    const std::size_t n = probs.size();

    if (method == recalibration_method::intercept_update) {
        std::vector<double> lp(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            lp[i] = logit(clip_prob(probs[i]));
            y[i] = labels[i];
        }
        matrix x(n, 1);
        for (std::size_t i = 0; i < n; ++i) x(i, 0) = 1.0;
        irls_options opt;
        opt.offset = lp;
        r.intercept = irls_logistic(x, y, opt).beta[0];
        r.slope = 1.0;
        return r;
    }
    if (method == recalibration_method::platt) {
        std::vector<double> y(n);
        matrix x(n, 2);
        for (std::size_t i = 0; i < n; ++i) {
            x(i, 0) = 1.0;
            x(i, 1) = logit(clip_prob(probs[i]));
            y[i] = labels[i];
        }
        irls_result fit = irls_logistic(x, y);
        r.intercept = fit.beta[0];
        r.slope = fit.beta[1];
        return r;
    }

    // isotonic: PAVA over (p, y) sorted by p; ties keep input order
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return probs[a] < probs[b]; });
    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = labels[order[i]];
    std::vector<double> fit = pava_fit(ys);
    for (std::size_t i = 0; i < n; ++i) {
        double p = probs[order[i]];
        if (!r.iso_breakpoints.empty() && r.iso_breakpoints.back() == p) {
            r.iso_levels.back() = fit[i]; // equal inputs share the final pooled level
            continue;
        }
        r.iso_breakpoints.push_back(p);
        r.iso_levels.push_back(fit[i]);
    }
    return r;
}

std::vector<double> apply_recalibrator(const recalibrator& r, const std::vector<double>& probs) {
    std::vector<double> out(probs.size());
    if (r.method == recalibration_method::isotonic) {
        for (std::size_t i = 0; i < probs.size(); ++i) {
            double p = probs[i];
            // level of the largest breakpoint <= p, flat beyond the fitted range
            auto it = std::upper_bound(r.iso_breakpoints.begin(), r.iso_breakpoints.end(), p);
            std::size_t idx = it == r.iso_breakpoints.begin()
                                  ? 0
                                  : static_cast<std::size_t>(it - r.iso_breakpoints.begin()) - 1;
            out[i] = std::clamp(r.iso_levels[idx], 0.0, 1.0);
        }
        return out;
    }
    for (std::size_t i = 0; i < probs.size(); ++i) {
        double lp = logit(clip_prob(probs[i]));
        out[i] = std::clamp(sigmoid(r.intercept + r.slope * lp), 0.0, 1.0);
    }
    return out;
}

// --- Regression ----------------------------------------------------------------------------

regression_report make_regression_report(const std::vector<double>& preds,
                                         const std::vector<double>& trues) {
    if (preds.size() != trues.size() || preds.size() < 2)
        throw error(errc::invalid_spec, "need equal-length vectors of at least 2");
    regression_report rep;
    const std::size_t n = preds.size();
    double se = 0.0, ae = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = preds[i] - trues[i];
        se += d * d;
        ae += std::abs(d);
    }
    rep.rmse = std::sqrt(se / static_cast<double>(n));
    rep.mae = ae / static_cast<double>(n);

    double mp = 0.0, mt = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mp += preds[i];
        mt += trues[i];
    }
    mp /= static_cast<double>(n);
    mt /= static_cast<double>(n);
    double spt = 0.0, spp = 0.0, stt = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        spt += (preds[i] - mp) * (trues[i] - mt);
        spp += (preds[i] - mp) * (preds[i] - mp);
        stt += (trues[i] - mt) * (trues[i] - mt);
    }
    if (stt <= 0.0) {
        rep.r2_defined = false;
    } else if (spp <= 0.0) {
        rep.r2 = 0.0; // constant predictions explain nothing
    } else {
        double corr = spt / std::sqrt(spp * stt);
        rep.r2 = corr * corr;
    }
    return rep;
}

namespace {

double quantile_type7(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    double h = (static_cast<double>(n) - 1.0) * p;
    auto lo = static_cast<std::size_t>(std::floor(h));
    std::size_t hi = std::min(lo + 1, n - 1);
    double frac = h - std::floor(h);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

} // namespace

std::vector<std::pair<double, double>> qq_points(const std::vector<double>& preds,
                                                 const std::vector<double>& trues, std::size_t q) {
    std::vector<double> ps(preds), ts(trues);
    std::sort(ps.begin(), ps.end());
    std::sort(ts.begin(), ts.end());
    std::vector<std::pair<double, double>> pts;
    pts.reserve(q);
    for (std::size_t j = 0; j < q; ++j) {
        double p = q > 1 ? static_cast<double>(j) / (static_cast<double>(q) - 1.0) : 0.5;
        pts.emplace_back(quantile_type7(ps, p), quantile_type7(ts, p));
    }
    return pts;
}

overfit_verdict overfit_gap(double train_metric, double test_metric, metric_direction kind,
                            double threshold) {
    overfit_verdict v;
    if (kind == metric_direction::higher_is_better) {
        v.gap = train_metric - test_metric;
        v.relevant_overfit = v.gap > threshold;
    } else {
        v.gap = test_metric - train_metric;
        // relative rule for error-style metrics
        v.relevant_overfit = train_metric > 0.0 ? v.gap > 0.10 * train_metric : v.gap > threshold;
    }
    return v;
}

std::vector<std::vector<std::string>> extrapolation_flags(const std::vector<feature_range>& ranges,
                                                          const dataset& ds) {
    std::vector<std::vector<std::string>> flags(ds.n_rows);
    for (const auto& fr : ranges) {
        int ci = ds.column_index(fr.name);
        if (ci < 0) continue;
        auto c = static_cast<std::size_t>(ci);
        for (std::size_t r = 0; r < ds.n_rows; ++r) {
            if (ds.is_missing(r, c)) continue;
            double v = ds.at(r, c);
            bool out_of_range;
            if (fr.kind == feature_kind::continuous) {
                out_of_range = v < fr.lo || v > fr.hi;
            } else {
                out_of_range =
                    std::find(fr.levels.begin(), fr.levels.end(), static_cast<int>(v)) == fr.levels.end();
            }
            if (out_of_range) flags[r].push_back(fr.name);
        }
    }
    return flags;
}

} // namespace clinpred
