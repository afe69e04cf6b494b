#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "clinpred/error.hpp"
#include "clinpred/eval.hpp"
#include "clinpred/rng.hpp"
#include "clinpred/solvers.hpp"

using namespace clinpred;

namespace {

// labels drawn from known probabilities, the calibration simulation oracle
std::vector<int> draw_labels(const std::vector<double>& probs, rng& g) {
    std::vector<int> y(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) y[i] = g.uniform() < probs[i] ? 1 : 0;
    return y;
}

std::vector<double> random_probs(std::size_t n, rng& g) {
    std::vector<double> p(n);
    for (auto& v : p) v = sigmoid(1.2 * g.normal() - 0.1);
    return p;
}

// Exhaustive order-constrained least squares for short sequences: enumerate
// every contiguous block partition, keep the monotone ones, take the best.
std::vector<double> isotonic_exhaustive(const std::vector<double>& y) {
    const std::size_t n = y.size();
    std::vector<double> best;
    double best_sse = 1e300;
    for (std::uint32_t mask = 0; mask < (1u << (n - 1)); ++mask) {
        std::vector<double> fit(n);
        std::size_t start = 0;
        bool monotone = true;
        double prev = -1e300;
        for (std::size_t i = 0; i <= n; ++i) {
            bool boundary = i == n || (i < n && i > start && (mask & (1u << (i - 1))));
            if (i == n || boundary) {
                double sum = 0.0;
                for (std::size_t j = start; j < i; ++j) sum += y[j];
                double mean = sum / static_cast<double>(i - start);
                if (mean < prev - 1e-12) {
                    monotone = false;
                    break;
                }
                for (std::size_t j = start; j < i; ++j) fit[j] = mean;
                prev = mean;
                start = i;
            }
        }
        if (!monotone) continue;
        double sse = 0.0;
        for (std::size_t j = 0; j < n; ++j) sse += (fit[j] - y[j]) * (fit[j] - y[j]);
        if (sse < best_sse - 1e-12) {
            best_sse = sse;
            best = fit;
        }
    }
    return best;
}

} // namespace

TEST_CASE("calibration report on known-truth simulation") {
    rng g(101);
    std::vector<double> probs = random_probs(20000, g);
    std::vector<int> y = draw_labels(probs, g);
    calibration_report rep = make_calibration_report(probs, y);
    CHECK(std::abs(rep.intercept) <= 0.05);
    CHECK(rep.slope >= 0.95);
    CHECK(rep.slope <= 1.05);
    CHECK(rep.eo_ratio == doctest::Approx(1.0).epsilon(0.03));
    CHECK(rep.eci < 0.5);
}

TEST_CASE("calibration analytic cases") {
    // perfect deterministic predictions
    std::vector<double> hard = {0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0};
    std::vector<int> y_hard = {0, 0, 1, 1, 0, 1, 1, 0, 1, 0};
    calibration_report rep = make_calibration_report(hard, y_hard, 5);
    CHECK(rep.brier == 0.0);

    // constant 0.5 on balanced labels
    std::vector<double> half(40, 0.5);
    std::vector<int> y_half(40);
    for (std::size_t i = 0; i < 40; ++i) y_half[i] = i % 2;
    calibration_report rep2 = make_calibration_report(half, y_half, 10);
    CHECK(rep2.brier == doctest::Approx(0.25));
    CHECK(rep2.eo_ratio == doctest::Approx(1.0));
}

TEST_CASE("calibration bins are near-equal and restore the sorted sample") {
    rng g(55);
    std::vector<double> probs = random_probs(103, g);
    std::vector<int> y = draw_labels(probs, g);
    calibration_report rep = make_calibration_report(probs, y, 10);
    REQUIRE(rep.bins.size() == 10);
    std::size_t total = 0, lo = 1000, hi = 0;
    double prev_mean = -1.0;
    for (const auto& b : rep.bins) {
        total += b.count;
        lo = std::min(lo, b.count);
        hi = std::max(hi, b.count);
        CHECK(b.mean_predicted >= prev_mean); // ordered by predicted probability
        prev_mean = b.mean_predicted;
    }
    CHECK(total == 103);
    CHECK(hi - lo <= 1);
}

TEST_CASE("hosmer-lemeshow statistic and a known chi-square tail value") {
    // perfectly matching groups -> statistic 0, p = 1
    std::vector<double> probs;
    std::vector<int> y;
    for (int grp = 0; grp < 10; ++grp) {
        double p = 0.05 + 0.09 * grp;
        for (int i = 0; i < 100; ++i) {
            probs.push_back(p);
            y.push_back(i < static_cast<int>(p * 100 + 0.5) ? 1 : 0);
        }
    }
    hl_result exact = hosmer_lemeshow(probs, y, 10);
    CHECK(exact.statistic == doctest::Approx(0.0).scale(1.0).epsilon(0.3));
    CHECK(exact.p_value > 0.9);

    CHECK_THROWS_AS(hosmer_lemeshow({0.5, 0.4, 0.6}, {1, 0, 1}, 10), error); // n < 2g

    // the chi-square tail behind the test: 15.507 at df 8 -> p = 0.050
    CHECK(std::abs(chi_square_sf(15.507, 8.0) - 0.050) < 1e-3);
}

TEST_CASE("incomplete gamma series and continued fraction agree") {
    // points around x ~ a+1 where both evaluation routes converge well;
    // P(a,x) + Q(a,x) = 1 ties them together
    const std::pair<double, double> points[] = {{4.0, 7.7535}, {2.5, 3.0}, {5.0, 6.0},
                                                {10.0, 12.0},  {1.0, 1.5}, {8.0, 9.0},
                                                {4.0, 5.0},    {6.0, 5.5}};
    for (const auto& [a, x] : points) {
        double p = gamma_p_series(a, x);
        double q = gamma_q_continued_fraction(a, x);
        CHECK(std::abs((p + q) - 1.0) < 1e-10);
    }
}

TEST_CASE("intercept update recovers a known logit shift") {
    rng g(202);
    std::vector<double> probs = random_probs(20000, g);
    std::vector<double> shifted(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i)
        shifted[i] = sigmoid(std::log(probs[i] / (1 - probs[i])) + 0.7);
    std::vector<int> y = draw_labels(shifted, g);

    recalibrator r = fit_recalibrator(probs, y, recalibration_method::intercept_update);
    CHECK(r.intercept == doctest::Approx(0.7).epsilon(0.05 / 0.7));
    CHECK(r.slope == 1.0);

    // applying the update restores calibration
    std::vector<double> fixed = apply_recalibrator(r, probs);
    calibration_report rep = make_calibration_report(fixed, y);
    CHECK(std::abs(rep.intercept) < 0.06);
}

TEST_CASE("platt scaling is near identity on calibrated input") {
    rng g(303);
    std::vector<double> probs = random_probs(20000, g);
    std::vector<int> y = draw_labels(probs, g);
    recalibrator r = fit_recalibrator(probs, y, recalibration_method::platt);
    CHECK(std::abs(r.intercept - 0.0) < 0.05);
    CHECK(std::abs(r.slope - 1.0) < 0.05);
}

TEST_CASE("platt with positive slope preserves AUC exactly") {
    rng g(404);
    std::vector<double> probs = random_probs(3000, g);
    std::vector<int> y = draw_labels(probs, g);
    recalibrator r = fit_recalibrator(probs, y, recalibration_method::platt);
    REQUIRE(r.slope > 0.0);
    std::vector<double> out = apply_recalibrator(r, probs);
    for (double p : out) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
    CHECK(std::abs(auc(out, y) - auc(probs, y)) < 1e-12);
}

TEST_CASE("pava pools the violating pair") {
    std::vector<double> fit = pava_fit({1.0, 3.0, 2.0});
    CHECK(fit[0] == doctest::Approx(1.0));
    CHECK(fit[1] == doctest::Approx(2.5));
    CHECK(fit[2] == doctest::Approx(2.5));
}

TEST_CASE("pava equals exhaustive order-constrained least squares up to length 8") {
    rng g(505);
    for (int rep = 0; rep < 200; ++rep) {
        std::size_t n = 2 + g.below(7);
        std::vector<double> y(n);
        for (auto& v : y) v = std::floor(g.uniform() * 8.0) / 4.0;
        std::vector<double> fast = pava_fit(y);
        std::vector<double> slow = isotonic_exhaustive(y);
        REQUIRE(fast.size() == slow.size());
        for (std::size_t i = 0; i < n; ++i) CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-10));
        for (std::size_t i = 1; i < n; ++i) CHECK(fast[i] >= fast[i - 1] - 1e-12);
    }
}

TEST_CASE("isotonic recalibration is monotone, clamped and flat beyond the range") {
    rng g(606);
    std::vector<double> probs = random_probs(2000, g);
    std::vector<int> y = draw_labels(probs, g);
    recalibrator r = fit_recalibrator(probs, y, recalibration_method::isotonic);
    for (std::size_t i = 1; i < r.iso_levels.size(); ++i)
        CHECK(r.iso_levels[i] >= r.iso_levels[i - 1] - 1e-12);

    std::vector<double> inputs = {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0};
    std::vector<double> out = apply_recalibrator(r, inputs);
    for (std::size_t i = 0; i < out.size(); ++i) {
        CHECK(out[i] >= 0.0);
        CHECK(out[i] <= 1.0);
        if (i) CHECK(out[i] >= out[i - 1] - 1e-12); // monotone in its input
    }
    // flat extension beyond the fitted range
    CHECK(apply_recalibrator(r, {-5.0})[0] == doctest::Approx(r.iso_levels.front()));
    CHECK(apply_recalibrator(r, {5.0})[0] == doctest::Approx(r.iso_levels.back()));
}

TEST_CASE("recalibrator fit requires both classes") {
    CHECK_THROWS_AS(fit_recalibrator({0.5, 0.6}, {1, 1}, recalibration_method::platt), error);
}
