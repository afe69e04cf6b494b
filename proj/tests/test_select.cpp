#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "clinpred/data.hpp"
#include "clinpred/error.hpp"
#include "clinpred/rng.hpp"
#include "clinpred/select.hpp"
#include "clinpred/solvers.hpp"

using namespace clinpred;

namespace {

// 3 planted informative features among 7 pure-noise ones
dataset planted_dataset(std::size_t n, std::uint64_t seed) {
    rng g(seed);
    std::vector<column_spec> specs;
    for (int j = 0; j < 10; ++j)
        specs.push_back({"f" + std::to_string(j), feature_kind::continuous, column_role::feature, {}});
    specs.push_back({"y", feature_kind::binary, column_role::outcome, {}});
    dataset ds = dataset::with_shape(specs, n, endpoint_mode::classification);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < 10; ++j) ds.at(i, j) = g.normal();
        double eta = 1.6 * ds.at(i, 0) - 1.4 * ds.at(i, 1) + 1.2 * ds.at(i, 2);
        ds.at(i, 10) = g.uniform() < sigmoid(eta) ? 1.0 : 0.0;
    }
    return ds;
}

} // namespace

TEST_CASE("rfe recovers planted informative features") {
    std::vector<std::size_t> sizes;
    for (std::size_t s = 1; s <= 10; ++s) sizes.push_back(s);
    estimator_spec spec;
    spec.algo = algorithm::glm_logistic;
    resampling_plan plan{resample_kind::kfold, 5, 0};
    recipe_config rcfg;
    rcfg.impute = false;

    int hits = 0;
    const int runs = 20;
    for (int run = 0; run < runs; ++run) {
        dataset train = planted_dataset(400, 1000 + run);
        rfe_result res = rfe_run(train, spec, sizes, plan, rcfg, tune_metric::roc, 50 + run);
        bool all_informative = true;
        for (const char* want : {"f0", "f1", "f2"})
            all_informative &= std::find(res.selected.begin(), res.selected.end(), want) !=
                               res.selected.end();
        hits += all_informative ? 1 : 0;
        CHECK(res.profile.size() == sizes.size());
        CHECK(res.selected.size() == res.best_size);
    }
    CHECK(hits >= 19); // >= 95% of 20 seeded runs
}

TEST_CASE("rfe profile covers exactly the requested sizes") {
    dataset train = planted_dataset(200, 5);
    std::vector<std::size_t> sizes = {4, 6, 8, 10};
    estimator_spec spec;
    spec.algo = algorithm::glm_logistic;
    recipe_config rcfg;
    rcfg.impute = false;
    rfe_result res = rfe_run(train, spec, sizes, {resample_kind::kfold, 3, 0}, rcfg,
                             tune_metric::roc, 9);
    CHECK(res.sizes == sizes);
    CHECK(res.profile.size() == 4);
    CHECK(res.trace.rows == 4);
    CHECK(res.trace.cols == 3);
    CHECK(std::find(sizes.begin(), sizes.end(), res.best_size) != sizes.end());
}

TEST_CASE("rfe single forced feature and size validation") {
    dataset ds = parse_csv("a,y\n0.1,0\n0.9,1\n0.2,0\n0.8,1\n0.3,0\n0.7,1\n0.15,0\n0.85,1\n");
    ds.specs[0].kind = feature_kind::continuous;
    ds.specs[1].role = column_role::outcome;
    ds.mode = endpoint_mode::classification;
    estimator_spec spec;
    spec.algo = algorithm::glm_logistic;
    recipe_config rcfg;
    rcfg.impute = false;
    rfe_result res = rfe_run(ds, spec, {1}, {resample_kind::kfold, 2, 0}, rcfg, tune_metric::roc, 3);
    CHECK(res.best_size == 1);
    CHECK(res.selected == std::vector<std::string>{"a"});

    CHECK_THROWS_AS(rfe_run(ds, spec, {5}, {resample_kind::kfold, 2, 0}, rcfg, tune_metric::roc, 3),
                    error); // SizesOutOfRange
}

TEST_CASE("rfe never scores a subset on its ranking rows") {
    dataset train = planted_dataset(150, 77);
    estimator_spec spec;
    spec.algo = algorithm::glm_logistic;
    recipe_config rcfg;
    rcfg.impute = false;
    // ranking and scoring share the analysis rows; the assessment rows stay
    // held out, which the trace shape plus the resample laws already cover.
    // Here: determinism of the whole procedure.
    rfe_result a = rfe_run(train, spec, {3, 5}, {resample_kind::kfold, 4, 0}, rcfg, tune_metric::roc, 8);
    rfe_result b = rfe_run(train, spec, {3, 5}, {resample_kind::kfold, 4, 0}, rcfg, tune_metric::roc, 8);
    CHECK(a.trace.a == b.trace.a);
    CHECK(a.selected == b.selected);

    rfe_result c = rfe_run(train, spec, {3, 5}, {resample_kind::kfold, 4, 0}, rcfg, tune_metric::roc, 8,
                           4); // threads
    CHECK(a.trace.a == c.trace.a);
}

TEST_CASE("pca on perfectly correlated 2-d data") {
    rng g(21);
    matrix x(300, 2);
    for (std::size_t i = 0; i < 300; ++i) {
        double v = g.normal();
        x(i, 0) = v;
        x(i, 1) = 3.0 * v - 1.0; // y = 3x - 1, exact linear relation
    }
    pca_model m = pca_fit(x, 2);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CHECK(m.rotation(0, 0) == doctest::Approx(inv_sqrt2).epsilon(1e-8));
    CHECK(m.rotation(1, 0) == doctest::Approx(inv_sqrt2).epsilon(1e-8));
    CHECK(m.explained[0] == doctest::Approx(2.0).epsilon(1e-8)); // 100% of the trace
    CHECK(m.explained[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
    CHECK(m.rank_deficient); // near-zero eigenvalue kept, flagged
}

TEST_CASE("pca eigenvalues sum to the feature count and scores decorrelate") {
    rng g(22);
    const std::size_t n = 400, p = 6;
    matrix x(n, p);
    for (std::size_t i = 0; i < n; ++i) {
        double shared = g.normal();
        for (std::size_t j = 0; j < p; ++j) x(i, j) = g.normal() + (j < 3 ? shared : 0.0);
    }
    pca_model m = pca_fit(x, p);
    double total = 0.0;
    for (double v : m.explained) total += v;
    CHECK(total == doctest::Approx(static_cast<double>(p)).epsilon(1e-10));
    for (std::size_t c = 1; c < p; ++c) CHECK(m.explained[c] <= m.explained[c - 1] + 1e-12);

    // rotation orthonormal
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < p; ++b) {
            double dot = 0.0;
            for (std::size_t r = 0; r < p; ++r) dot += m.rotation(r, a) * m.rotation(r, b);
            CHECK(dot == doctest::Approx(a == b ? 1.0 : 0.0).scale(1.0).epsilon(1e-8));
        }

    // scores have diagonal covariance equal to the eigenvalues
    matrix scores = pca_transform(m, x);
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = a; b < p; ++b) {
            double cov = 0.0;
            for (std::size_t i = 0; i < n; ++i) cov += scores(i, a) * scores(i, b);
            cov /= static_cast<double>(n - 1);
            if (a == b) CHECK(cov == doctest::Approx(m.explained[a]).epsilon(1e-8));
            else CHECK(std::abs(cov) < 1e-8);
        }
    }
}

TEST_CASE("pca full-rank transform inverts exactly") {
    rng g(23);
    const std::size_t n = 100, p = 4;
    matrix x(n, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) x(i, j) = g.normal() * (1.0 + static_cast<double>(j));
    pca_model m = pca_fit(x, p);
    matrix scores = pca_transform(m, x);
    matrix back = pca_inverse_transform(m, scores);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) {
            double z = (x(i, j) - m.center[j]) / m.scale[j];
            CHECK(back(i, j) == doctest::Approx(z).scale(1.0).epsilon(1e-8));
        }
}

TEST_CASE("variable importance: classification") {
    rng g(24);
    const std::size_t n = 10000;
    std::vector<column_spec> specs = {
        {"copy", feature_kind::binary, column_role::feature, {}},
        {"noise", feature_kind::continuous, column_role::feature, {}},
        {"anti", feature_kind::continuous, column_role::feature, {}},
        {"y", feature_kind::binary, column_role::outcome, {}},
    };
    dataset ds = dataset::with_shape(specs, n, endpoint_mode::classification);
    for (std::size_t i = 0; i < n; ++i) {
        int y = g.uniform() < 0.5 ? 1 : 0;
        ds.at(i, 3) = y;
        ds.at(i, 0) = y; // identical to the label
        ds.at(i, 1) = g.normal();
        ds.at(i, 2) = y ? g.normal() - 0.4 : g.normal() + 0.4; // informative but inverted
    }
    importance_report rep = variable_importance(ds);
    REQUIRE(rep.entries.size() == 3);
    CHECK(rep.entries[0].raw == doctest::Approx(1.0));   // folded AUC of a perfect copy
    CHECK(rep.entries[0].scaled == doctest::Approx(100.0));
    CHECK(rep.entries[1].raw == doctest::Approx(0.5).epsilon(0.02 / 0.5)); // independence
    CHECK(rep.entries[2].raw > 0.55);                    // folding rescues the inverted feature
    CHECK(rep.entries[1].scaled == doctest::Approx(0.0).scale(1.0).epsilon(2.0));
    // raw order equals scaled order
    CHECK(rep.entries[0].scaled > rep.entries[2].scaled);
    CHECK(rep.entries[2].scaled > rep.entries[1].scaled);
}

TEST_CASE("variable importance: folded auc on a constructed 10-row set") {
    // feature whose single-feature AUC is 0.3 -> folded raw 0.7
    dataset ds = parse_csv(
        "f,y\n0.9,0\n0.8,0\n0.7,0\n0.6,0\n0.55,0\n0.5,1\n0.4,1\n0.35,1\n0.3,1\n0.83,1\n");
    ds.specs[0].kind = feature_kind::continuous;
    ds.specs[1].role = column_role::outcome;
    ds.mode = endpoint_mode::classification;
    // pair counting: positives mostly score below negatives
    importance_report rep = variable_importance(ds);
    double raw = rep.entries[0].raw;
    CHECK(raw > 0.5);
    // compute the unfolded auc by hand to confirm the folding relation
    std::vector<double> probs;
    std::vector<int> labels;
    for (std::size_t r = 0; r < ds.n_rows; ++r) {
        probs.push_back(ds.at(r, 0));
        labels.push_back(static_cast<int>(ds.at(r, 1)));
    }
    double a = auc(probs, labels);
    CHECK(raw == doctest::Approx(std::max(a, 1.0 - a)));
}

TEST_CASE("variable importance: regression uses squared correlation") {
    rng g(26);
    const std::size_t n = 2000;
    std::vector<column_spec> specs = {
        {"lin", feature_kind::continuous, column_role::feature, {}},
        {"noise", feature_kind::continuous, column_role::feature, {}},
        {"flat", feature_kind::continuous, column_role::feature, {}},
        {"y", feature_kind::continuous, column_role::outcome, {}},
    };
    dataset ds = dataset::with_shape(specs, n, endpoint_mode::regression);
    for (std::size_t i = 0; i < n; ++i) {
        double t = g.normal();
        ds.at(i, 0) = t;
        ds.at(i, 1) = g.normal();
        ds.at(i, 2) = 3.25; // constant
        ds.at(i, 3) = 2.0 * t + 0.5 * g.normal();
    }
    importance_report rep = variable_importance(ds);
    CHECK(rep.entries[0].raw == doctest::Approx(0.94).epsilon(0.05));
    CHECK(rep.entries[1].raw < 0.01);
    CHECK(rep.entries[2].raw == 0.0);
    CHECK(rep.entries[2].constant);
    CHECK(rep.entries[0].scaled == doctest::Approx(100.0));
}
