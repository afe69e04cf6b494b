// Benchmark comparing the serial reference path (threads = 1) against the
// OpenMP path on the compute-heavy kernels: forest growing and resampled grid
// tuning. Both paths must produce identical numbers; the speedup column is
// the only thing allowed to differ.

#include <chrono>
#include <cstdio>
#include <string>

#include "clinpred/data.hpp"
#include "clinpred/models.hpp"
#include "clinpred/parallel.hpp"
#include "clinpred/preprocess.hpp"

using namespace clinpred;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

struct bench_row {
    const char* name;
    double serial_s;
    double parallel_s;
    bool identical;
};

} // namespace

int main(int argc, char** argv) {
    std::size_t n = argc > 1 ? std::stoull(argv[1]) : 4000;
    int threads = argc > 2 ? std::stoi(argv[2]) : hardware_threads();
    std::printf("cohort n=%zu, comparing 1 thread vs %d threads\n\n", n, threads);

    dataset cohort = generate_synthetic_cohort(n, 7);
    // drop the survival column, keep the binary endpoint
    for (auto& sp : cohort.specs)
        if (sp.name == "Survival") sp.role = column_role::ignored;

    recipe_config rcfg;
    recipe rec = fit_recipe(cohort, rcfg);
    applied_recipe applied = apply_recipe(rec, cohort, false);
    dataset design = applied.data;

    std::vector<bench_row> rows;

    {
        hyper_point h;
        h.n_trees = 200;
        h.mtry = 4;
        auto t0 = clock_type::now();
        model_params serial = fit_model_params(algorithm::random_forest, h, design, {}, 42, 1);
        double ts = seconds_since(t0);
        t0 = clock_type::now();
        model_params parallel = fit_model_params(algorithm::random_forest, h, design, {}, 42, threads);
        double tp = seconds_since(t0);
        std::vector<double> a = score_design(algorithm::random_forest, serial, design, cohort.mode);
        std::vector<double> b = score_design(algorithm::random_forest, parallel, design, cohort.mode);
        rows.push_back({"random forest (200 trees)", ts, tp, a == b});
    }

    {
        estimator_spec spec;
        spec.algo = algorithm::glm_logistic;
        train_control ctrl;
        ctrl.plan = {resample_kind::bootstrap, 25, 0};
        ctrl.metric = tune_metric::roc;
        ctrl.seed = 42;
        ctrl.threads = 1;
        auto t0 = clock_type::now();
        trained_result serial = train_tuned(cohort, spec, ctrl);
        double ts = seconds_since(t0);
        ctrl.threads = threads;
        t0 = clock_type::now();
        trained_result parallel = train_tuned(cohort, spec, ctrl);
        double tp = seconds_since(t0);
        bool same = serial.metric_table.a == parallel.metric_table.a;
        rows.push_back({"glm tuning (boot 25)", ts, tp, same});
    }

    {
        estimator_spec spec;
        spec.algo = algorithm::knn;
        train_control ctrl;
        ctrl.plan = {resample_kind::kfold, 5, 0};
        ctrl.metric = tune_metric::roc;
        ctrl.seed = 42;
        ctrl.threads = 1;
        auto t0 = clock_type::now();
        trained_result serial = train_tuned(cohort, spec, ctrl);
        double ts = seconds_since(t0);
        ctrl.threads = threads;
        t0 = clock_type::now();
        trained_result parallel = train_tuned(cohort, spec, ctrl);
        double tp = seconds_since(t0);
        bool same = serial.metric_table.a == parallel.metric_table.a;
        rows.push_back({"knn tuning (5-fold, 5 k values)", ts, tp, same});
    }

    std::printf("%-34s %10s %10s %9s %s\n", "kernel", "serial[s]", "openmp[s]", "speedup", "identical");
    for (const auto& r : rows)
        std::printf("%-34s %10.3f %10.3f %8.2fx %s\n", r.name, r.serial_s, r.parallel_s,
                    r.serial_s / r.parallel_s, r.identical ? "yes" : "NO");

    bool all_same = true;
    for (const auto& r : rows) all_same = all_same && r.identical;
    return all_same ? 0 : 1;
}
