#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "clinpred/error.hpp"
#include "clinpred/eval.hpp"
#include "clinpred/rng.hpp"

using namespace clinpred;

namespace {

// O(n^2) pair counting with ties worth one half; the AUC oracle.
double auc_pair_counting(const std::vector<double>& probs, const std::vector<int>& labels) {
    double concordant = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (!labels[i]) continue;
        for (std::size_t j = 0; j < probs.size(); ++j) {
            if (labels[j]) continue;
            ++pairs;
            if (probs[i] > probs[j]) concordant += 1.0;
            else if (probs[i] == probs[j]) concordant += 0.5;
        }
    }
    return concordant / static_cast<double>(pairs);
}

} // namespace

TEST_CASE("auc basics") {
    CHECK(auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}) == 1.0);
    CHECK(auc({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}) == 0.5);
    // one concordant, one discordant pair
    CHECK(auc({0.9, 0.8, 0.3}, {1, 0, 1}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(auc({0.1, 0.2}, {1, 1}), error); // SingleClass
}

TEST_CASE("auc equals pair counting exactly on 200 random instances with ties") {
    rng g(77);
    for (int rep = 0; rep < 200; ++rep) {
        std::size_t n = 5 + g.below(196);
        std::vector<double> probs(n);
        std::vector<int> labels(n);
        bool pos = false, neg = false;
        for (std::size_t i = 0; i < n; ++i) {
            // coarse grid forces plenty of ties
            probs[i] = static_cast<double>(g.below(10)) / 10.0;
            labels[i] = g.uniform() < 0.4 ? 1 : 0;
            (labels[i] ? pos : neg) = true;
        }
        if (!pos) labels[0] = 1;
        if (!neg) labels[n - 1] = 0;
        double fast = auc(probs, labels);
        double slow = auc_pair_counting(probs, labels);
        CHECK(std::abs(fast - slow) < 1e-12);
    }
}

TEST_CASE("confusion matrix uses the strict > rule") {
    std::vector<double> probs = {0.2, 0.5, 0.7, 1.0};
    std::vector<int> labels = {0, 0, 1, 1};
    confusion_matrix cm = confusion_at(probs, labels, 0.5);
    CHECK(cm.tp == 2);
    CHECK(cm.tn == 2); // 0.5 is not > 0.5
    CHECK(cm.fp == 0);
    CHECK(cm.fn == 0);

    confusion_matrix all_pos = confusion_at(probs, labels, 0.0);
    CHECK(all_pos.fn == 0); // cutoff 0 predicts everything above zero positive
    CHECK(all_pos.tn == 0);
    confusion_matrix at_zero = confusion_at({0.0, 0.1}, {0, 1}, 0.0);
    CHECK(at_zero.tn == 1); // strict rule: p=0 stays a negative prediction
    CHECK(at_zero.tp == 1);

    confusion_matrix none = confusion_at(probs, labels, 1.0);
    CHECK(none.tp == 0);
    CHECK(none.fp == 0);
}

TEST_CASE("discrimination metrics on a reference confusion matrix") {
    confusion_matrix cm;
    cm.tp = 869;
    cm.tn = 800;
    cm.fp = 157;
    cm.fn = 174;
    REQUIRE(cm.total() == 2000);
    discrimination_report rep = make_discrimination_report(cm, 0.9, 0.5);
    CHECK(std::abs(rep.accuracy - 0.8345) < 5e-4);
    CHECK(std::abs(rep.sensitivity - 0.8331) < 5e-4);
    CHECK(std::abs(rep.specificity - 0.8359) < 5e-4);
    CHECK(std::abs(rep.ppv - 0.8470) < 5e-4);
    CHECK(std::abs(rep.npv - 0.8214) < 5e-4);
    CHECK(std::abs(rep.f1 - 0.8400) < 5e-4);
    // accuracy identity
    double n = static_cast<double>(cm.total());
    CHECK(rep.accuracy ==
          doctest::Approx((rep.sensitivity * cm.positives() + rep.specificity * cm.negatives()) / n));
}

TEST_CASE("perfect and degenerate confusion matrices") {
    confusion_matrix perfect;
    perfect.tp = 10;
    perfect.tn = 10;
    discrimination_report rep = make_discrimination_report(perfect, 1.0);
    CHECK(rep.accuracy == 1.0);
    CHECK(rep.sensitivity == 1.0);
    CHECK(rep.specificity == 1.0);
    CHECK(rep.ppv == 1.0);
    CHECK(rep.npv == 1.0);
    CHECK(rep.f1 == 1.0);

    confusion_matrix no_pos_pred;
    no_pos_pred.tn = 5;
    no_pos_pred.fn = 5;
    discrimination_report rep2 = make_discrimination_report(no_pos_pred, 0.5);
    CHECK(!rep2.ppv_defined);
    CHECK(!rep2.f1_defined);
}

TEST_CASE("balanced cutoff hits the separating gap") {
    std::vector<double> probs = {0.2, 0.3, 0.6, 0.9};
    std::vector<int> labels = {0, 0, 1, 1};
    double cut = optimal_cutoff(probs, labels, cutoff_mode::balanced);
    CHECK(cut == doctest::Approx(0.45));
    confusion_matrix cm = confusion_at(probs, labels, cut);
    CHECK(cm.tp == 2);
    CHECK(cm.tn == 2);
}

TEST_CASE("balanced cutoff matches brute force on 100 random instances") {
    rng g(31);
    for (int rep = 0; rep < 100; ++rep) {
        std::size_t n = 10 + g.below(90);
        std::vector<double> probs(n);
        std::vector<int> labels(n);
        bool pos = false, neg = false;
        for (std::size_t i = 0; i < n; ++i) {
            probs[i] = static_cast<double>(g.below(20)) / 20.0;
            labels[i] = g.uniform() < 0.5 ? 1 : 0;
            (labels[i] ? pos : neg) = true;
        }
        if (!pos) labels[0] = 1;
        if (!neg) labels[n - 1] = 0;

        double cut = optimal_cutoff(probs, labels, cutoff_mode::balanced);
        auto objective = [&](double c) {
            confusion_matrix cm = confusion_at(probs, labels, c);
            double sens = static_cast<double>(cm.tp) / static_cast<double>(cm.positives());
            double spec = static_cast<double>(cm.tn) / static_cast<double>(cm.negatives());
            return (1 - sens) * (1 - sens) + (1 - spec) * (1 - spec);
        };
        // brute force over a dense threshold sweep
        double best = 1e9;
        for (int t = 0; t <= 1000; ++t) best = std::min(best, objective(t / 1000.0));
        CHECK(objective(cut) <= best + 1e-12);
    }
}

TEST_CASE("rule-in and rule-out cutoffs") {
    rng g(71);
    std::vector<double> probs(500);
    std::vector<int> labels(500);
    for (std::size_t i = 0; i < 500; ++i) {
        labels[i] = g.uniform() < 0.5 ? 1 : 0;
        probs[i] = std::clamp(0.3 + 0.4 * labels[i] + 0.25 * g.normal(), 0.0, 1.0);
    }
    double rule_in = optimal_cutoff(probs, labels, cutoff_mode::rule_in, 0.95);
    confusion_matrix cm_in = confusion_at(probs, labels, rule_in);
    CHECK(static_cast<double>(cm_in.tn) / cm_in.negatives() >= 0.95);
    // adjusted upward past the default
    double balanced = optimal_cutoff(probs, labels, cutoff_mode::balanced);
    CHECK(rule_in > balanced);

    double rule_out = optimal_cutoff(probs, labels, cutoff_mode::rule_out, 0.95);
    confusion_matrix cm_out = confusion_at(probs, labels, rule_out);
    CHECK(static_cast<double>(cm_out.tp) / cm_out.positives() >= 0.95);
    CHECK(rule_out < balanced);

    // a sensitivity of 1 is unachievable when a positive sits at probability 0
    std::vector<double> p2 = {0.0, 0.5, 0.9};
    std::vector<int> l2 = {1, 0, 1};
    CHECK_THROWS_AS(optimal_cutoff(p2, l2, cutoff_mode::rule_out, 1.0), error);
}

TEST_CASE("roc curve is monotone between corners") {
    rng g(13);
    std::vector<double> probs(200);
    std::vector<int> labels(200);
    for (std::size_t i = 0; i < 200; ++i) {
        labels[i] = g.uniform() < 0.5 ? 1 : 0;
        probs[i] = std::clamp(0.5 + 0.3 * (labels[i] ? 1 : -1) + 0.2 * g.normal(), 0.0, 1.0);
    }
    auto curve = roc_curve(probs, labels);
    REQUIRE(curve.size() >= 2);
    CHECK(curve.front().fpr == doctest::Approx(0.0).scale(1.0));
    CHECK(curve.back().tpr == doctest::Approx(1.0));
    for (std::size_t i = 1; i < curve.size(); ++i) {
        CHECK(curve[i].fpr >= curve[i - 1].fpr);
        CHECK(curve[i].tpr >= curve[i - 1].tpr - 1e-12);
    }
}

TEST_CASE("regression report formulas") {
    regression_report perfect = make_regression_report({1, 2, 3}, {1, 2, 3});
    CHECK(perfect.rmse == 0.0);
    CHECK(perfect.mae == 0.0);
    CHECK(perfect.r2 == doctest::Approx(1.0));

    regression_report rep = make_regression_report({1, 2, 3}, {1, 2, 4});
    CHECK(rep.rmse == doctest::Approx(0.5774).epsilon(1e-4 / 0.5774));
    CHECK(rep.mae == doctest::Approx(0.3333).epsilon(1e-4 / 0.3333));
    CHECK(rep.r2 == doctest::Approx(0.9643).epsilon(1e-4 / 0.9643));

    regression_report flat = make_regression_report({1, 2, 3}, {2, 2, 2});
    CHECK(!flat.r2_defined); // ZeroVarianceTruth flagged, not thrown
}

TEST_CASE("mae never exceeds rmse (property)") {
    rng g(3);
    for (int rep = 0; rep < 50; ++rep) {
        std::size_t n = 2 + g.below(100);
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = g.normal() * 3.0;
            b[i] = a[i] + g.normal();
        }
        regression_report r = make_regression_report(a, b);
        CHECK(r.mae <= r.rmse + 1e-12);
    }
}

TEST_CASE("qq points") {
    rng g(29);
    std::vector<double> x(5000), y(5000);
    for (std::size_t i = 0; i < 5000; ++i) {
        x[i] = g.normal();
        y[i] = g.normal();
    }
    auto pts = qq_points(x, y, 100);
    REQUIRE(pts.size() == 100);
    for (std::size_t i = 1; i < pts.size(); ++i) {
        CHECK(pts[i].first >= pts[i - 1].first);   // non-decreasing
        CHECK(pts[i].second >= pts[i - 1].second);
    }
    // same distribution: points near the diagonal away from the tails
    for (std::size_t i = 5; i < 95; ++i)
        CHECK(std::abs(pts[i].first - pts[i].second) < 0.25);

    // shifted predictions offset the x axis by exactly the shift
    std::vector<double> shifted(x);
    for (auto& v : shifted) v += 1.0;
    auto pts2 = qq_points(shifted, x, 50);
    for (const auto& [p, t] : pts2) CHECK(p - t == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("overfit gap sign rules") {
    overfit_verdict v = overfit_gap(0.926, 0.922, metric_direction::higher_is_better);
    CHECK(v.gap == doctest::Approx(0.004));
    CHECK(!v.relevant_overfit);

    overfit_verdict bad = overfit_gap(0.95, 0.70, metric_direction::higher_is_better);
    CHECK(bad.relevant_overfit);

    overfit_verdict better = overfit_gap(0.80, 0.85, metric_direction::higher_is_better);
    CHECK(better.gap < 0.0);
    CHECK(!better.relevant_overfit);

    overfit_verdict rmse_ok = overfit_gap(1.504, 1.515, metric_direction::lower_is_better);
    CHECK(!rmse_ok.relevant_overfit);
    overfit_verdict rmse_bad = overfit_gap(1.0, 1.2, metric_direction::lower_is_better);
    CHECK(rmse_bad.relevant_overfit); // 20% relative
}

TEST_CASE("extrapolation flags name the offending features") {
    std::vector<feature_range> ranges;
    ranges.push_back({"Age", feature_kind::continuous, 50.0, 80.0, {}});
    ranges.push_back({"Histology", feature_kind::categorical, 0, 0, {1, 2, 3}});

    dataset ds = parse_csv("Age,Histology\n60,2\n30,1\n70,9\n30,7\n");
    auto flags = extrapolation_flags(ranges, ds);
    CHECK(flags[0].empty());
    CHECK(flags[1] == std::vector<std::string>{"Age"});
    CHECK(flags[2] == std::vector<std::string>{"Histology"});
    CHECK(flags[3] == std::vector<std::string>{"Age", "Histology"});
}
