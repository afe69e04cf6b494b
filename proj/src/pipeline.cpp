#include "clinpred/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "clinpred/error.hpp"
#include "clinpred/model_io.hpp"
#include "clinpred/rng.hpp"
#include "clinpred/svg.hpp"

namespace fs = std::filesystem;

namespace clinpred {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string checksum_hex(const std::string& content) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(content.data(), content.size())));
    return buf;
}

void assign_roles(dataset& ds, const pipeline_config& cfg) {
    int oc = ds.column_index(cfg.outcome);
    if (oc < 0) throw error(errc::missing_column, "outcome column '" + cfg.outcome + "' not found");
    for (auto& sp : ds.specs) sp.role = column_role::feature;
    ds.specs[static_cast<std::size_t>(oc)].role = column_role::outcome;
    for (const auto& name : cfg.drop) {
        int ci = ds.column_index(name);
        if (ci < 0) throw error(errc::missing_column, "drop column '" + name + "' not found");
        ds.specs[static_cast<std::size_t>(ci)].role = column_role::ignored;
    }
    ds.mode = cfg.task;
    if (cfg.task == endpoint_mode::classification) {
        auto c = static_cast<std::size_t>(oc);
        for (std::size_t r = 0; r < ds.n_rows; ++r) {
            if (ds.is_missing(r, c))
                throw error(errc::missing_data, "outcome has missing entries");
            double v = ds.at(r, c);
            if (v != 0.0 && v != 1.0)
                throw error(errc::invalid_spec, "classification outcome must be 0/1");
        }
        ds.specs[c].kind = feature_kind::binary;
    }
}

std::vector<int> labels_of(const dataset& ds) {
    auto oc = static_cast<std::size_t>(ds.outcome_index());
    std::vector<int> y(ds.n_rows);
    for (std::size_t r = 0; r < ds.n_rows; ++r) y[r] = ds.at(r, oc) == 1.0 ? 1 : 0;
    return y;
}

std::vector<double> values_of(const dataset& ds) {
    auto oc = static_cast<std::size_t>(ds.outcome_index());
    std::vector<double> y(ds.n_rows);
    for (std::size_t r = 0; r < ds.n_rows; ++r) y[r] = ds.at(r, oc);
    return y;
}

void write_file(const std::string& path, const std::string& content,
                std::vector<std::pair<std::string, std::string>>& manifest) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error(errc::io_error, "cannot write " + path);
    out << content;
    if (!out) throw error(errc::io_error, "write failed for " + path);
    manifest.emplace_back(fs::path(path).filename().string(), checksum_hex(content));
}

std::string metrics_csv_classification(const discrimination_report& d, const calibration_report& c) {
    std::ostringstream out;
    out << "metric,value\n";
    out << "auc," << fmt(d.auc) << '\n';
    out << "accuracy," << fmt(d.accuracy) << '\n';
    out << "sensitivity," << (d.sensitivity_defined ? fmt(d.sensitivity) : "NA") << '\n';
    out << "specificity," << (d.specificity_defined ? fmt(d.specificity) : "NA") << '\n';
    out << "ppv," << (d.ppv_defined ? fmt(d.ppv) : "NA") << '\n';
    out << "npv," << (d.npv_defined ? fmt(d.npv) : "NA") << '\n';
    out << "f1," << (d.f1_defined ? fmt(d.f1) : "NA") << '\n';
    out << "cutoff," << fmt(d.cutoff) << '\n';
    out << "calibration_intercept," << fmt(c.intercept) << '\n';
    out << "calibration_slope," << fmt(c.slope) << '\n';
    out << "brier," << fmt(c.brier) << '\n';
    out << "eo_ratio," << fmt(c.eo_ratio) << '\n';
    out << "eci_grouped," << fmt(c.eci) << '\n';
    out << "hl_statistic," << fmt(c.hl_stat) << '\n';
    out << "hl_p," << fmt(c.hl_p) << '\n';
    out << "hl_note,\"" << c.hl_note << "\"\n";
    return out.str();
}

std::string metrics_csv_regression(const regression_report& r) {
    std::ostringstream out;
    out << "metric,value\n";
    out << "rmse," << fmt(r.rmse) << '\n';
    out << "mae," << fmt(r.mae) << '\n';
    out << "r2," << (r.r2_defined ? fmt(r.r2) : "NA") << '\n';
    return out.str();
}

std::string comparison_csv(const run_report& rep, const pipeline_config& cfg) {
    std::ostringstream out;
    out << "model,best_hyper,mean_" << (cfg.metric == tune_metric::roc ? "auc" : "rmse")
        << ",sd,selected\n";
    for (std::size_t i = 0; i < rep.comparison.size(); ++i) {
        const auto& m = rep.comparison[i];
        out << algorithm_name(m.algo) << ",\"" << m.best_hyper << "\"," << fmt(m.mean_metric) << ','
            << fmt(m.sd_metric) << ',' << (i == rep.selected ? 1 : 0) << '\n';
    }
    return out.str();
}

// winning point's metric per resample, long format
std::string resamples_csv(const run_report& rep, const pipeline_config& cfg) {
    std::ostringstream out;
    out << "model,resample," << (cfg.metric == tune_metric::roc ? "auc" : "rmse") << '\n';
    for (const auto& m : rep.comparison)
        for (std::size_t r = 0; r < m.per_resample.size(); ++r)
            out << algorithm_name(m.algo) << ',' << r << ',' << fmt(m.per_resample[r]) << '\n';
    return out.str();
}

} // namespace

dataset load_pipeline_input(const pipeline_config& cfg) {
    dataset ds;
    if (!cfg.data_path.empty()) {
        ds = load_csv(cfg.data_path);
    } else {
        ds = generate_synthetic_cohort(cfg.generate_n, cfg.seed, cfg.generator);
    }
    assign_roles(ds, cfg);
    return ds;
}

run_report cmd_run(const pipeline_config& cfg, run_trace* trace) {
    run_trace local;
    run_trace& tr = trace ? *trace : local;

    if (!(cfg.split_fraction > 0.0 && cfg.split_fraction < 1.0))
        throw error(errc::config_error, "split_fraction must be in (0,1)");
    for (const auto& req : cfg.models)
        if (!algorithm_supports(req.algo, cfg.task))
            throw error(errc::config_error,
                        std::string(algorithm_name(req.algo)) + " does not support this endpoint");
    if (cfg.task == endpoint_mode::regression && cfg.balance.kind != balance_kind::none)
        throw error(errc::config_error, "class balancing applies to classification endpoints only");

    run_report rep;
    rep.task = cfg.task;

    dataset full = load_pipeline_input(cfg);
    tr.add("input_loaded n=" + std::to_string(full.n_rows));

    split_pair split = split_train_test(full, cfg.split_fraction, cfg.seed);
    rep.n_train = split.train.n_rows;
    rep.n_test = split.test.n_rows;
    tr.add("split train=" + std::to_string(rep.n_train) + " test=" + std::to_string(rep.n_test));

    rep.balance = class_balance_check(split);
    if (rep.balance.warn) rep.notes.push_back("partition balance differs beyond the advisory threshold");

    // everything below, until the freeze, reads split.train only
    dataset train = std::move(split.train);
    if (cfg.task == endpoint_mode::classification) {
        std::size_t positives = 0;
        auto oc = static_cast<std::size_t>(train.outcome_index());
        for (std::size_t r = 0; r < train.n_rows; ++r)
            if (train.at(r, oc) == 1.0) ++positives;
        double incidence = static_cast<double>(positives) / static_cast<double>(train.n_rows);
        incidence = std::clamp(incidence, 1e-6, 1.0 - 1e-6);
        rep.size_advice = sample_size_check(train.feature_columns().size(), incidence, train.n_rows,
                                            positives);
        if (rep.size_advice.verdict != size_verdict::ok)
            rep.notes.push_back("sample-size rule of thumb not met");
    }

    recipe_config rcfg = cfg.recipe;
    rcfg.balance = cfg.balance;

    if (cfg.rfe) {
        std::vector<std::size_t> sizes = cfg.rfe_sizes;
        std::size_t p = train.feature_columns().size();
        if (sizes.empty())
            for (std::size_t s = std::max<std::size_t>(1, p / 2); s <= p; ++s) sizes.push_back(s);
        estimator_spec rfe_spec;
        rfe_spec.algo = cfg.rfe_estimator;
        resampling_plan rfe_plan = cfg.rfe_plan;
        rep.rfe = rfe_run(train, rfe_spec, sizes, rfe_plan, rcfg, cfg.metric,
                          mix_seed(cfg.seed, 0xFE), cfg.threads);
        rep.rfe_ran = true;
        tr.add("rfe best_size=" + std::to_string(rep.rfe.best_size));
        // reduce training features to the selection
        for (auto& sp : train.specs) {
            if (sp.role != column_role::feature) continue;
            if (std::find(rep.rfe.selected.begin(), rep.rfe.selected.end(), sp.name) ==
                rep.rfe.selected.end())
                sp.role = column_role::ignored;
        }
    }

    // per-model tuned training, training rows only
    std::vector<trained_result> results;
    for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) {
        const model_request& req = cfg.models[mi];
        estimator_spec spec;
        spec.algo = req.algo;
        spec.grid = req.grid;
        if (spec.grid.empty() && req.algo == algorithm::elastic_net && !req.enet_alphas.empty()) {
            // alpha override with the data-driven lambda path
            recipe_config probe_cfg = rcfg;
            probe_cfg.balance = balance_strategy{};
            recipe probe = fit_recipe(train, probe_cfg);
            applied_recipe applied = apply_recipe(probe, train, false);
            estimator_spec tmp;
            tmp.algo = algorithm::elastic_net;
            std::vector<hyper_point> all = default_grid(tmp.algo, cfg.task, applied.data);
            for (const auto& h : all)
                if (std::find(req.enet_alphas.begin(), req.enet_alphas.end(), h.alpha) !=
                    req.enet_alphas.end())
                    spec.grid.push_back(h);
        }

        train_control ctrl;
        ctrl.plan = cfg.plan;
        ctrl.metric = cfg.metric;
        ctrl.balance = cfg.balance;
        ctrl.recipe_cfg = cfg.recipe;
        // one shared tuning seed: every model family is compared on the same
        // resample index sets
        ctrl.seed = mix_seed(cfg.seed, 0xA11);
        ctrl.threads = cfg.threads;

        tr.add(std::string("train_tuned model=") + algorithm_name(req.algo));
        trained_result res = train_tuned(train, spec, ctrl);

        model_summary summary;
        summary.algo = req.algo;
        summary.best_hyper = res.grid[res.best_index].describe(req.algo);
        summary.mean_metric = res.metric_mean[res.best_index];
        for (std::size_t r = 0; r < res.metric_table.cols; ++r) {
            double v = res.metric_table(res.best_index, r);
            if (!std::isnan(v)) summary.per_resample.push_back(v);
        }
        double sd = 0.0;
        for (double v : summary.per_resample) {
            double d = v - summary.mean_metric;
            sd += d * d;
        }
        summary.sd_metric = summary.per_resample.size() > 1
                                ? std::sqrt(sd / static_cast<double>(summary.per_resample.size() - 1))
                                : 0.0;
        rep.comparison.push_back(std::move(summary));
        for (auto& a : res.audits) rep.audits.push_back(std::move(a));
        results.push_back(std::move(res));
    }

    // final model selected on training metric only; exact ties go to the
    // simpler family
    bool maximize = cfg.metric == tune_metric::roc;
    std::size_t winner = 0;
    for (std::size_t i = 1; i < rep.comparison.size(); ++i) {
        double v = rep.comparison[i].mean_metric, cur = rep.comparison[winner].mean_metric;
        if ((maximize && v > cur) || (!maximize && v < cur)) {
            winner = i;
        } else if (v == cur && algorithm_simplicity_rank(rep.comparison[i].algo) <
                                   algorithm_simplicity_rank(rep.comparison[winner].algo)) {
            winner = i;
        }
    }
    rep.selected = winner;
    rep.resampled_train_metric = rep.comparison[winner].mean_metric;
    rep.notes.push_back("model families ordered by interpretability for tie-breaks: "
                        "glm < ridge/lasso/enet < nb < knn < rf < gbm");

    fitted_model final_model = std::move(results[winner].best);

    // cutoff policy resolved on training data, then frozen into the model
    predictions train_preds;
    if (cfg.task == endpoint_mode::classification) {
        train_preds = predict(final_model, train);
        std::vector<int> y = labels_of(train);
        double cut = 0.5;
        switch (cfg.cutoff.mode) {
            case cutoff_policy::kind::fixed: cut = cfg.cutoff.fixed_value; break;
            case cutoff_policy::kind::balanced:
                cut = optimal_cutoff(train_preds.probability, y, cutoff_mode::balanced);
                break;
            case cutoff_policy::kind::rule_in:
                cut = optimal_cutoff(train_preds.probability, y, cutoff_mode::rule_in, cfg.cutoff.target);
                break;
            case cutoff_policy::kind::rule_out:
                cut = optimal_cutoff(train_preds.probability, y, cutoff_mode::rule_out, cfg.cutoff.target);
                break;
        }
        final_model.cutoff = cut;
        rep.cutoff = cut;
        for (std::size_t i = 0; i < train_preds.probability.size(); ++i)
            train_preds.label[i] = train_preds.probability[i] > cut ? 1 : 0;
    }
    tr.add("final_model_frozen algo=" + std::string(algorithm_name(final_model.algo)));

    rep.importance = variable_importance(train);

    fs::create_directories(cfg.out_dir);
    std::string model_path = (fs::path(cfg.out_dir) / "model.cpm").string();

    // training metrics of the frozen model
    std::vector<roc_point> roc_points;
    std::vector<std::pair<double, double>> qq;
    if (cfg.task == endpoint_mode::classification) {
        std::vector<int> y = labels_of(train);
        double train_auc = auc(train_preds.probability, y);
        rep.train_discrimination = make_discrimination_report(
            confusion_at(train_preds.probability, y, rep.cutoff), train_auc, rep.cutoff);
        rep.train_calibration = make_calibration_report(train_preds.probability, y);
    } else {
        predictions p = predict(final_model, train);
        rep.train_regression = make_regression_report(p.value, values_of(train));
    }

    // one-shot internal validation on the held-out rows
    tr.add("test_access");
    const dataset& test = split.test;
    if (cfg.task == endpoint_mode::classification) {
        predictions p = predict(final_model, test);
        std::vector<int> y = labels_of(test);
        double test_auc = auc(p.probability, y);
        rep.test_discrimination = make_discrimination_report(confusion_at(p.probability, y, rep.cutoff),
                                                             test_auc, rep.cutoff);
        rep.test_calibration = make_calibration_report(p.probability, y);
        rep.overfit = overfit_gap(rep.resampled_train_metric, test_auc,
                                  metric_direction::higher_is_better);
        roc_points = roc_curve(p.probability, y);
    } else {
        predictions p = predict(final_model, test);
        rep.test_regression = make_regression_report(p.value, values_of(test));
        rep.overfit = overfit_gap(rep.resampled_train_metric, rep.test_regression.rmse,
                                  metric_direction::lower_is_better);
        qq = qq_points(p.value, values_of(test));
    }
    if (rep.overfit.relevant_overfit) rep.notes.push_back("train-test gap flags relevant overfitting");

    try {
        model_save(final_model, model_path);
        {
            std::ifstream in(model_path, std::ios::binary);
            std::ostringstream buf;
            buf << in.rdbuf();
            rep.manifest.emplace_back("model.cpm", checksum_hex(buf.str()));
        }
        auto emitted = emit_report_files(rep, cfg, roc_points, qq, cfg.out_dir);
        rep.manifest.insert(rep.manifest.end(), emitted.begin(), emitted.end());
        {
            // rewrite the manifest so it covers the model file as well
            std::string manifest_text;
            for (const auto& [file, sum] : rep.manifest) manifest_text += sum + "  " + file + "\n";
            std::ofstream mf((fs::path(cfg.out_dir) / "manifest.txt").string(), std::ios::binary);
            mf << manifest_text;
        }
    } catch (...) {
        // no partial outputs: drop whatever this run already wrote
        std::error_code ec;
        for (const auto& [file, sum] : rep.manifest) fs::remove(fs::path(cfg.out_dir) / file, ec);
        fs::remove(fs::path(cfg.out_dir) / "manifest.txt", ec);
        throw;
    }
    tr.add("report_written");
    return rep;
}

std::vector<std::pair<std::string, std::string>> emit_report_files(
    const run_report& rep, const pipeline_config& cfg, const std::vector<roc_point>& roc,
    const std::vector<std::pair<double, double>>& qq, const std::string& dir) {
    std::vector<std::pair<std::string, std::string>> manifest;
    fs::create_directories(dir);
    auto path = [&](const char* name) { return (fs::path(dir) / name).string(); };

    if (rep.task == endpoint_mode::classification) {
        if (!rep.single_cohort)
            write_file(path("metrics_train.csv"),
                       metrics_csv_classification(rep.train_discrimination, rep.train_calibration),
                       manifest);
        write_file(path("metrics_test.csv"),
                   metrics_csv_classification(rep.test_discrimination, rep.test_calibration), manifest);
    } else {
        if (!rep.single_cohort)
            write_file(path("metrics_train.csv"), metrics_csv_regression(rep.train_regression),
                       manifest);
        write_file(path("metrics_test.csv"), metrics_csv_regression(rep.test_regression), manifest);
    }
    if (!rep.comparison.empty()) {
        write_file(path("comparison.csv"), comparison_csv(rep, cfg), manifest);
        write_file(path("resamples.csv"), resamples_csv(rep, cfg), manifest);
    }

    if (cfg.emit_plots) {
        if (rep.task == endpoint_mode::classification) {
            write_file(path("roc.svg"), svg_roc_plot(roc, rep.test_discrimination.auc), manifest);
            write_file(path("calibration.svg"),
                       svg_calibration_plot(rep.test_calibration.bins, rep.test_calibration.intercept,
                                            rep.test_calibration.slope),
                       manifest);
        } else {
            write_file(path("qq.svg"), svg_qq_plot(qq), manifest);
        }
        if (!rep.comparison.empty()) {
            std::vector<std::pair<std::string, double>> bars;
            for (const auto& m : rep.comparison)
                bars.emplace_back(algorithm_name(m.algo), m.mean_metric);
            write_file(path("comparison.svg"),
                       svg_comparison_plot(bars, cfg.metric == tune_metric::roc ? "AUC" : "RMSE"),
                       manifest);
        }
        if (rep.rfe_ran)
            write_file(path("rfe_profile.svg"),
                       svg_rfe_profile(rep.rfe.sizes, rep.rfe.profile,
                                       cfg.metric == tune_metric::roc ? "AUC" : "RMSE"),
                       manifest);
        if (!rep.importance.entries.empty())
            write_file(path("importance.svg"), svg_importance_plot(rep.importance), manifest);
    }

    std::string manifest_text;
    for (const auto& [file, sum] : manifest) manifest_text += sum + "  " + file + "\n";
    std::ofstream mf(path("manifest.txt"), std::ios::binary);
    mf << manifest_text;
    return manifest;
}

void cmd_predict(const std::string& model_path, const std::string& csv_path,
                 const std::string& out_path) {
    fitted_model model = model_load(model_path);
    dataset ds = load_csv(csv_path);
    predictions p = predict(model, ds);

    std::ostringstream out;
    auto join = [](const std::vector<std::string>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += ';';
            s += v[i];
        }
        return s;
    };
    if (model.mode == endpoint_mode::classification) {
        out << "row,probability,label,extrapolation,imputed_fields\n";
        for (std::size_t r = 0; r < ds.n_rows; ++r)
            out << r << ',' << fmt(p.probability[r]) << ',' << p.label[r] << ','
                << join(p.extrapolation[r]) << ',' << join(p.imputed_fields[r]) << '\n';
    } else {
        out << "row,prediction,extrapolation,imputed_fields\n";
        for (std::size_t r = 0; r < ds.n_rows; ++r)
            out << r << ',' << fmt(p.value[r]) << ',' << join(p.extrapolation[r]) << ','
                << join(p.imputed_fields[r]) << '\n';
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw error(errc::io_error, "cannot write " + out_path);
    f << out.str();
}

run_report cmd_evaluate(const std::string& model_path, const std::string& csv_path,
                        const std::string& out_dir, bool emit_plots) {
    fitted_model model = model_load(model_path);
    dataset ds = load_csv(csv_path);
    int oc = ds.column_index(model.outcome_name);
    if (oc < 0)
        throw error(errc::schema_mismatch, "evaluation data lacks outcome '" + model.outcome_name + "'");
    for (auto& sp : ds.specs) sp.role = column_role::feature;
    ds.specs[static_cast<std::size_t>(oc)].role = column_role::outcome;
    ds.mode = model.mode;

    run_report rep;
    rep.task = model.mode;
    rep.single_cohort = true;
    rep.n_test = ds.n_rows;
    rep.cutoff = model.cutoff;

    pipeline_config stub; // carries plot/metric switches for the emitter
    stub.task = model.mode;
    stub.metric = model.mode == endpoint_mode::classification ? tune_metric::roc : tune_metric::rmse;
    stub.emit_plots = emit_plots;

    predictions p = predict(model, ds);
    std::vector<roc_point> roc;
    std::vector<std::pair<double, double>> qq;
    if (model.mode == endpoint_mode::classification) {
        std::vector<int> y = labels_of(ds);
        double a = auc(p.probability, y);
        rep.test_discrimination =
            make_discrimination_report(confusion_at(p.probability, y, model.cutoff), a, model.cutoff);
        rep.test_calibration = make_calibration_report(p.probability, y);
        roc = roc_curve(p.probability, y);
    } else {
        rep.test_regression = make_regression_report(p.value, values_of(ds));
        qq = qq_points(p.value, values_of(ds));
    }
    rep.manifest = emit_report_files(rep, stub, roc, qq, out_dir);
    return rep;
}

} // namespace clinpred
