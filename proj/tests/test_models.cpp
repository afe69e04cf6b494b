#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "clinpred/data.hpp"
#include "clinpred/error.hpp"
#include "clinpred/model_io.hpp"
#include "clinpred/models.hpp"
#include "clinpred/rng.hpp"
#include "clinpred/solvers.hpp"

using namespace clinpred;

namespace {

dataset classification_cohort(std::size_t n, std::uint64_t seed) {
    dataset ds = generate_synthetic_cohort(n, seed);
    for (auto& sp : ds.specs)
        if (sp.name == "Survival") sp.role = column_role::ignored;
    return ds;
}

dataset regression_cohort(std::size_t n, std::uint64_t seed) {
    dataset ds = generate_synthetic_cohort(n, seed);
    for (auto& sp : ds.specs) {
        if (sp.name == "Survival") sp.role = column_role::outcome;
        else if (sp.name == "TwelveMonths") sp.role = column_role::ignored;
    }
    ds.mode = endpoint_mode::regression;
    return ds;
}

train_control quick_ctrl(tune_metric metric, std::uint64_t seed) {
    train_control ctrl;
    ctrl.plan = {resample_kind::kfold, 5, 0};
    ctrl.metric = metric;
    ctrl.seed = seed;
    ctrl.threads = 1;
    return ctrl;
}

} // namespace

TEST_CASE("naive bayes posterior symmetry and analytic case") {
    // one continuous feature, class A ~ N(0,1), class B ~ N(2,1), x = 1
    dataset ds = parse_csv("x,y\n0,0\n0,0\n2,1\n2,1\n");
    ds.specs[0].kind = feature_kind::continuous;
    ds.specs[1].role = column_role::outcome;
    // means 0 and 2; force unit variances through the fitted sd floor by
    // constructing a wider sample
    rng g(1);
    std::string csv = "x,y\n";
    for (int i = 0; i < 2000; ++i) csv += std::to_string(g.normal()) + ",0\n";
    for (int i = 0; i < 2000; ++i) csv += std::to_string(2.0 + g.normal()) + ",1\n";
    dataset big = parse_csv(csv);
    big.specs[0].kind = feature_kind::continuous;
    big.specs[1].role = column_role::outcome;

    hyper_point h;
    model_params params = fit_model_params(algorithm::naive_bayes, h, big, {}, 3, 1);

    dataset probe = parse_csv("x,y\n1.0,0\n");
    probe.specs[0].kind = feature_kind::continuous;
    probe.specs[1].role = column_role::outcome;
    auto out = score_design(algorithm::naive_bayes, params, probe, endpoint_mode::classification);
    CHECK(out[0] == doctest::Approx(0.5).epsilon(0.05)); // equal likelihood ratio at the midpoint
}

TEST_CASE("naive bayes exact analytic posterior with hand-built parameters") {
    // class A ~ N(0,1), class B ~ N(2,1), equal priors: at x=1 the likelihood
    // ratio is exactly 1, so the posterior is exactly one half
    nb_params nb;
    nb.prior[0] = 0.5;
    nb.prior[1] = 0.5;
    nb.use_kernel = false;
    nb_feature f;
    f.continuous = true;
    f.mean[0] = 0.0;
    f.sd[0] = 1.0;
    f.mean[1] = 2.0;
    f.sd[1] = 1.0;
    nb.features.push_back(f);
    model_params params = nb;

    dataset probe = parse_csv("x,y\n1.0,0\n0.0,0\n2.0,0\n");
    probe.specs[0].kind = feature_kind::continuous;
    probe.specs[1].role = column_role::outcome;
    auto out = score_design(algorithm::naive_bayes, params, probe, endpoint_mode::classification);
    CHECK(out[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(out[1] < 0.5);  // closer to class A's center
    CHECK(out[2] > 0.5);
    CHECK(out[1] == doctest::Approx(1.0 - out[2]).epsilon(1e-9)); // symmetry
}

TEST_CASE("naive bayes laplace smoothing keeps unseen-level likelihoods positive") {
    dataset ds = parse_csv("c,y\n1,0\n1,0\n2,0\n1,1\n3,1\n3,1\n");
    ds.specs[0].kind = feature_kind::categorical;
    ds.specs[0].levels = {1, 2, 3};
    ds.specs[1].role = column_role::outcome;
    hyper_point h;
    h.laplace = 1.0;
    model_params params = fit_model_params(algorithm::naive_bayes, h, ds, {}, 3, 1);
    const auto& nb = std::get<nb_params>(params);
    // level 2 never occurs in class 1 yet keeps positive probability
    for (int cls = 0; cls < 2; ++cls)
        for (double lp : nb.features[0].level_log_prob[cls]) CHECK(std::isfinite(lp));

    dataset probe = parse_csv("c,y\n2,0\n");
    probe.specs[0].kind = feature_kind::categorical;
    probe.specs[0].levels = {1, 2, 3};
    probe.specs[1].role = column_role::outcome;
    auto out = score_design(algorithm::naive_bayes, params, probe, endpoint_mode::classification);
    CHECK(out[0] > 0.0);
    CHECK(out[0] < 1.0);
}

TEST_CASE("naive bayes kernel density mode scores sanely") {
    rng g(5);
    std::string csv = "x,y\n";
    for (int i = 0; i < 500; ++i) csv += std::to_string(g.normal() - 1.5) + ",0\n";
    for (int i = 0; i < 500; ++i) csv += std::to_string(g.normal() + 1.5) + ",1\n";
    dataset ds = parse_csv(csv);
    ds.specs[0].kind = feature_kind::continuous;
    ds.specs[1].role = column_role::outcome;
    hyper_point h;
    h.use_kernel = true;
    h.adjust = 1.0;
    model_params params = fit_model_params(algorithm::naive_bayes, h, ds, {}, 3, 1);
    dataset probe = parse_csv("x,y\n-2.5,0\n0,0\n2.5,0\n");
    probe.specs[0].kind = feature_kind::continuous;
    probe.specs[1].role = column_role::outcome;
    auto out = score_design(algorithm::naive_bayes, params, probe, endpoint_mode::classification);
    CHECK(out[0] < 0.1);
    CHECK(out[1] == doctest::Approx(0.5).epsilon(0.2));
    CHECK(out[2] > 0.9);
}

TEST_CASE("knn probability is the neighbor fraction") {
    dataset ds = parse_csv("a,b,y\n0,0,0\n0.1,0,0\n0,0.1,0\n1,1,1\n1.1,1,1\n1,1.1,1\n");
    ds.specs[0].kind = feature_kind::continuous;
    ds.specs[1].kind = feature_kind::continuous;
    ds.specs[2].role = column_role::outcome;
    hyper_point h;
    h.k = 3;
    model_params params = fit_model_params(algorithm::knn, h, ds, {}, 3, 1);
    dataset probe = parse_csv("a,b,y\n0.03,0.03,0\n1.03,1.03,0\n");
    probe.specs[0].kind = feature_kind::continuous;
    probe.specs[1].kind = feature_kind::continuous;
    probe.specs[2].role = column_role::outcome;
    auto out = score_design(algorithm::knn, params, probe, endpoint_mode::classification);
    CHECK(out[0] == 0.0); // three nearest are all negative
    CHECK(out[1] == 1.0);
}

TEST_CASE("train_tuned on the cohort reaches the expected AUC band") {
    dataset train = classification_cohort(1500, 33);
    estimator_spec spec;
    spec.algo = algorithm::glm_logistic;
    train_control ctrl = quick_ctrl(tune_metric::roc, 91);
    ctrl.plan = {resample_kind::bootstrap, 25, 0};
    trained_result res = train_tuned(train, spec, ctrl);
    CHECK(res.metric_mean[res.best_index] > 0.85);
    CHECK(res.metric_mean[res.best_index] < 0.97);
    CHECK(res.audits.size() == 25);
}

TEST_CASE("single-point grid equals a plain fit") {
    dataset train = classification_cohort(300, 41);
    estimator_spec spec;
    spec.algo = algorithm::glm_logistic;
    spec.grid.emplace_back();
    train_control ctrl = quick_ctrl(tune_metric::roc, 7);
    trained_result res = train_tuned(train, spec, ctrl);

    // replicate the refit path by hand
    recipe_config cfg = ctrl.recipe_cfg;
    cfg.balance = ctrl.balance;
    recipe rec = fit_recipe(train, cfg);
    applied_recipe full = apply_recipe(rec, train, true, mix_seed(ctrl.seed, 0x5EF1));
    model_params manual = fit_model_params(spec.algo, spec.grid[0], full.data, full.row_weights,
                                           mix_seed(ctrl.seed, 0x5EF2), 1);
    const auto& a = std::get<linear_params>(res.best.params);
    const auto& b = std::get<linear_params>(manual);
    REQUIRE(a.beta.size() == b.beta.size());
    for (std::size_t j = 0; j < a.beta.size(); ++j) CHECK(a.beta[j] == b.beta[j]);
}

TEST_CASE("train_tuned is deterministic and thread-count independent") {
    dataset train = classification_cohort(400, 55);
    estimator_spec spec;
    spec.algo = algorithm::naive_bayes;
    train_control ctrl = quick_ctrl(tune_metric::roc, 17);
    trained_result a = train_tuned(train, spec, ctrl);
    ctrl.threads = 4;
    trained_result b = train_tuned(train, spec, ctrl);
    CHECK(a.metric_table.a == b.metric_table.a);
    CHECK(a.best_index == b.best_index);
    CHECK(a.metric_mean == b.metric_mean);
}

TEST_CASE("tuning honesty: recipe fit rows never touch assessment rows") {
    dataset train = classification_cohort(300, 66);
    estimator_spec spec;
    spec.algo = algorithm::glm_logistic;
    train_control ctrl = quick_ctrl(tune_metric::roc, 23);
    ctrl.balance.kind = balance_kind::upsample;
    trained_result res = train_tuned(train, spec, ctrl);
    REQUIRE(!res.audits.empty());
    for (const auto& audit : res.audits) {
        std::set<std::uint32_t> fit_ids(audit.fit_row_ids.begin(), audit.fit_row_ids.end());
        for (auto id : audit.assessment_row_ids) CHECK(fit_ids.count(id) == 0);
    }
}

TEST_CASE("loocv classification pools held-out predictions into one AUC") {
    dataset train = classification_cohort(60, 202);
    estimator_spec spec;
    spec.algo = algorithm::glm_logistic;
    train_control ctrl = quick_ctrl(tune_metric::roc, 12);
    ctrl.plan = {resample_kind::loocv, 0, 0};
    ctrl.recipe_cfg.impute_k = 5;
    trained_result res = train_tuned(train, spec, ctrl);
    CHECK(res.metric_mean[res.best_index] > 0.5);
    CHECK(res.metric_mean[res.best_index] <= 1.0);
    CHECK(res.audits.size() == 60);
    CHECK(res.selection_note.find("pooled") != std::string::npos);
}

TEST_CASE("degenerate outcomes are rejected") {
    dataset ds = parse_csv("x,y\n1,1\n2,1\n3,1\n4,1\n5,1\n6,1\n");
    ds.specs[0].kind = feature_kind::continuous;
    ds.specs[1].role = column_role::outcome;
    ds.mode = endpoint_mode::classification;
    estimator_spec spec;
    spec.algo = algorithm::glm_logistic;
    train_control ctrl = quick_ctrl(tune_metric::roc, 1);
    ctrl.plan = {resample_kind::kfold, 2, 0};
    ctrl.recipe_cfg.impute = false;
    CHECK_THROWS_AS(train_tuned(ds, spec, ctrl), error);
}

TEST_CASE("regression tuning with ridge/lasso/enet improves over the null") {
    dataset train = regression_cohort(800, 77);
    for (algorithm algo : {algorithm::ridge, algorithm::lasso, algorithm::elastic_net}) {
        estimator_spec spec;
        spec.algo = algo;
        train_control ctrl = quick_ctrl(tune_metric::rmse, 19);
        trained_result res = train_tuned(train, spec, ctrl);
        CHECK(res.metric_mean[res.best_index] < 2.0); // null model sits near sd(Survival) = 3.1
        CHECK(res.metric_mean[res.best_index] > 1.0);
    }
}

TEST_CASE("prediction probabilities are valid and complete") {
    dataset train = classification_cohort(500, 88);
    estimator_spec spec;
    spec.algo = algorithm::gbm;
    hyper_point h;
    h.n_trees = 30;
    h.depth = 2;
    h.shrinkage = 0.1;
    h.min_obs = 10;
    spec.grid.push_back(h);
    train_control ctrl = quick_ctrl(tune_metric::roc, 3);
    trained_result res = train_tuned(train, spec, ctrl);

    dataset fresh = classification_cohort(100, 89);
    predictions p = predict(res.best, fresh);
    REQUIRE(p.probability.size() == 100);
    for (std::size_t i = 0; i < 100; ++i) {
        CHECK(p.probability[i] >= 0.0);
        CHECK(p.probability[i] <= 1.0);
        CHECK(p.label[i] == (p.probability[i] > res.best.cutoff ? 1 : 0));
    }
}

TEST_CASE("prediction imputes missing cells and flags extrapolation") {
    dataset train = classification_cohort(400, 99);
    estimator_spec spec;
    spec.algo = algorithm::glm_logistic;
    train_control ctrl = quick_ctrl(tune_metric::roc, 5);
    trained_result res = train_tuned(train, spec, ctrl);

    dataset fresh = classification_cohort(20, 100);
    auto kps = static_cast<std::size_t>(fresh.column_index("KPS"));
    auto age = static_cast<std::size_t>(fresh.column_index("Age"));
    fresh.set_missing(3, kps, true);
    fresh.at(5, age) = 30.0; // far below any training Age
    predictions p = predict(res.best, fresh);
    CHECK(p.probability.size() == 20);
    CHECK(p.imputed_fields[3] == std::vector<std::string>{"KPS"});
    bool age_flagged = false;
    for (const auto& f : p.extrapolation[5]) age_flagged |= f == "Age";
    CHECK(age_flagged);

    // missing a required feature column is a schema error naming the column
    dataset broken = fresh;
    std::vector<std::uint32_t> keep;
    dataset no_col;
    {
        std::vector<column_spec> specs;
        for (const auto& sp : fresh.specs)
            if (sp.name != "KPS") specs.push_back(sp);
        no_col = dataset::with_shape(specs, fresh.n_rows, fresh.mode);
        for (std::size_t r = 0; r < fresh.n_rows; ++r) {
            std::size_t o = 0;
            for (std::size_t c = 0; c < fresh.n_cols(); ++c) {
                if (fresh.specs[c].name == "KPS") continue;
                no_col.at(r, o) = fresh.at(r, c);
                no_col.set_missing(r, o, fresh.is_missing(r, c));
                ++o;
            }
        }
    }
    try {
        predict(res.best, no_col);
        FAIL("expected SchemaMismatch");
    } catch (const error& e) {
        CHECK(e.code() == errc::schema_mismatch);
        CHECK(std::string(e.what()).find("KPS") != std::string::npos);
    }
}

TEST_CASE("tuning errors surface cleanly from parallel workers") {
    dataset train = classification_cohort(120, 123);
    train.set_missing(7, 2, true); // hole that no imputer will fill
    estimator_spec spec;
    spec.algo = algorithm::glm_logistic;
    train_control ctrl = quick_ctrl(tune_metric::roc, 44);
    ctrl.recipe_cfg.impute = false;
    ctrl.threads = 4;
    CHECK_THROWS_AS(train_tuned(train, spec, ctrl), error);
    ctrl.threads = 1;
    CHECK_THROWS_AS(train_tuned(train, spec, ctrl), error);
}

TEST_CASE("predict rejects missing cells when no imputer was co-trained") {
    dataset train = classification_cohort(200, 121);
    estimator_spec spec;
    spec.algo = algorithm::glm_logistic;
    train_control ctrl = quick_ctrl(tune_metric::roc, 6);
    ctrl.recipe_cfg.impute = false; // no co-trained imputer
    trained_result res = train_tuned(train, spec, ctrl);

    dataset fresh = classification_cohort(10, 122);
    predictions ok = predict(res.best, fresh); // complete rows still score
    CHECK(ok.probability.size() == 10);

    fresh.set_missing(2, static_cast<std::size_t>(fresh.column_index("Age")), true);
    CHECK_THROWS_AS(predict(res.best, fresh), error);
}

TEST_CASE("model save/load round-trips predictions bit-exactly") {
    dataset train = classification_cohort(300, 111);
    dataset fresh = classification_cohort(50, 112);

    for (algorithm algo : {algorithm::glm_logistic, algorithm::naive_bayes, algorithm::knn,
                           algorithm::random_forest, algorithm::gbm}) {
        estimator_spec spec;
        spec.algo = algo;
        hyper_point h;
        h.k = 9;
        h.n_trees = 20;
        h.depth = 2;
        h.mtry = 4;
        h.shrinkage = 0.1;
        h.min_obs = 10;
        h.laplace = 1.0;
        spec.grid.push_back(h);
        train_control ctrl = quick_ctrl(tune_metric::roc, 29);
        trained_result res = train_tuned(train, spec, ctrl);

        std::string blob = serialize_model(res.best);
        fitted_model loaded = deserialize_model(blob);
        predictions before = predict(res.best, fresh);
        predictions after = predict(loaded, fresh);
        REQUIRE(before.probability.size() == after.probability.size());
        for (std::size_t i = 0; i < before.probability.size(); ++i)
            CHECK(before.probability[i] == after.probability[i]); // bit-exact
    }
}

TEST_CASE("model file corruption and version changes are caught") {
    dataset train = classification_cohort(200, 7);
    estimator_spec spec;
    spec.algo = algorithm::glm_logistic;
    train_control ctrl = quick_ctrl(tune_metric::roc, 31);
    trained_result res = train_tuned(train, spec, ctrl);
    std::string blob = serialize_model(res.best);

    std::string flipped = blob;
    std::size_t pos = flipped.find("cutoff 0.5");
    REQUIRE(pos != std::string::npos);
    flipped[pos + 7] = '9'; // flip a byte inside the body
    CHECK_THROWS_AS(deserialize_model(flipped), error);
    try {
        deserialize_model(flipped);
    } catch (const error& e) {
        CHECK(e.code() == errc::checksum_mismatch);
    }

    // future version: rebuild with a bumped header and a fresh checksum
    std::string future = blob;
    std::size_t hpos = future.find("clinpred-model 1");
    future.replace(hpos, 16, "clinpred-model 9");
    std::string body = future.substr(0, future.rfind("checksum "));
    char sum[24];
    std::snprintf(sum, sizeof sum, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(body.data(), body.size())));
    future = body + "checksum " + std::string(sum) + "\n";
    try {
        deserialize_model(future);
        FAIL("expected VersionMismatch");
    } catch (const error& e) {
        CHECK(e.code() == errc::version_mismatch);
        CHECK(std::string(e.what()).find("9") != std::string::npos);
        CHECK(std::string(e.what()).find("1") != std::string::npos);
    }
}

TEST_CASE("default grids match the documented shapes") {
    dataset train = classification_cohort(200, 13);
    recipe_config cfg;
    recipe rec = fit_recipe(train, cfg);
    applied_recipe applied = apply_recipe(rec, train, false);

    CHECK(default_grid(algorithm::glm_logistic, endpoint_mode::classification, applied.data).size() == 1);
    CHECK(default_grid(algorithm::ridge, endpoint_mode::classification, applied.data).size() == 25);
    CHECK(default_grid(algorithm::naive_bayes, endpoint_mode::classification, applied.data).size() == 4);
    CHECK(default_grid(algorithm::knn, endpoint_mode::classification, applied.data).size() == 5);
    CHECK(default_grid(algorithm::gbm, endpoint_mode::classification, applied.data).size() == 9);
    auto rf = default_grid(algorithm::random_forest, endpoint_mode::classification, applied.data);
    CHECK(rf.size() == 3); // sqrt(p), p/3, p with p=20
    CHECK(rf[0].mtry == 4);
    CHECK(rf[1].mtry == 6);
    CHECK(rf[2].mtry == 20);

    dataset reg = regression_cohort(200, 13);
    recipe rrec = fit_recipe(reg, cfg);
    applied_recipe rapplied = apply_recipe(rrec, reg, false);
    CHECK(default_grid(algorithm::lasso, endpoint_mode::regression, rapplied.data).size() == 50);
    CHECK(default_grid(algorithm::elastic_net, endpoint_mode::regression, rapplied.data).size() == 250);
}
