// clinpred: batch CLI for the clinical prediction modeling toolkit.
//
// Commands:
//   generate  --n <count> [--seed S] [--config cfg] --out cohort.csv
//   run       --config cfg [--seed S] [--threads T] [--out dir]
//   run       --evaluate-only --model m.cpm --data d.csv [--out dir]
//   predict   --model m.cpm --data d.csv --out predictions.csv
//   report    --model m.cpm --data d.csv [--out dir]
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 numeric failure.

#include <cstdio>
#include <cstring>
#include <map>
#include <string>

#include "clinpred/config.hpp"
#include "clinpred/error.hpp"
#include "clinpred/pipeline.hpp"

using namespace clinpred;

namespace {

struct cli_args {
    std::string command;
    std::map<std::string, std::string> flags;
    bool evaluate_only = false;
};

cli_args parse_args(int argc, char** argv) {
    cli_args args;
    if (argc < 2) throw error(errc::config_error, "usage: clinpred <command> [flags]");
    args.command = argv[1];
    for (int i = 2; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--evaluate-only") {
            args.evaluate_only = true;
            continue;
        }
        if (arg.rfind("--", 0) != 0) throw error(errc::config_error, "unexpected argument '" + arg + "'");
        if (i + 1 >= argc) throw error(errc::config_error, arg + " needs a value");
        args.flags[arg.substr(2)] = argv[++i];
    }
    return args;
}

std::string need(const cli_args& args, const char* flag) {
    auto it = args.flags.find(flag);
    if (it == args.flags.end())
        throw error(errc::config_error, std::string("--") + flag + " is required");
    return it->second;
}

int run_command(const cli_args& args) {
    if (args.command == "generate") {
        pipeline_config cfg;
        if (auto it = args.flags.find("config"); it != args.flags.end()) cfg = load_config(it->second);
        std::size_t n = std::stoull(need(args, "n"));
        std::uint64_t seed = cfg.seed;
        if (auto it = args.flags.find("seed"); it != args.flags.end()) seed = std::stoull(it->second);
        dataset ds = generate_synthetic_cohort(n, seed, cfg.generator);
        write_csv(ds, need(args, "out"));
        std::printf("wrote %zu rows x %zu columns\n", ds.n_rows, ds.n_cols());
        return 0;
    }

    if (args.command == "run" && args.evaluate_only) {
        std::string out = args.flags.count("out") ? args.flags.at("out") : "out";
        run_report rep = cmd_evaluate(need(args, "model"), need(args, "data"), out);
        if (rep.task == endpoint_mode::classification)
            std::printf("evaluated %zu rows: auc=%.4f accuracy=%.4f\n", rep.n_test,
                        rep.test_discrimination.auc, rep.test_discrimination.accuracy);
        else
            std::printf("evaluated %zu rows: rmse=%.4f r2=%.4f\n", rep.n_test,
                        rep.test_regression.rmse, rep.test_regression.r2);
        return 0;
    }

    if (args.command == "run") {
        pipeline_config cfg = load_config(need(args, "config"));
        if (auto it = args.flags.find("seed"); it != args.flags.end()) cfg.seed = std::stoull(it->second);
        if (auto it = args.flags.find("threads"); it != args.flags.end())
            cfg.threads = std::stoi(it->second);
        if (auto it = args.flags.find("out"); it != args.flags.end()) cfg.out_dir = it->second;

        run_report rep = cmd_run(cfg);
        std::printf("selected model: %s (%s)\n", algorithm_name(rep.comparison[rep.selected].algo),
                    rep.comparison[rep.selected].best_hyper.c_str());
        if (rep.task == endpoint_mode::classification) {
            std::printf("resampled train AUC %.4f | test AUC %.4f | gap %+.4f%s\n",
                        rep.resampled_train_metric, rep.test_discrimination.auc, rep.overfit.gap,
                        rep.overfit.relevant_overfit ? " (overfit!)" : "");
            std::printf("test calibration: intercept %+.4f slope %.4f brier %.4f\n",
                        rep.test_calibration.intercept, rep.test_calibration.slope,
                        rep.test_calibration.brier);
        } else {
            std::printf("resampled train RMSE %.4f | test RMSE %.4f MAE %.4f R2 %.4f\n",
                        rep.resampled_train_metric, rep.test_regression.rmse, rep.test_regression.mae,
                        rep.test_regression.r2);
        }
        for (const auto& note : rep.notes) std::printf("note: %s\n", note.c_str());
        std::printf("outputs in %s (%zu files)\n", cfg.out_dir.c_str(), rep.manifest.size());
        return 0;
    }

    if (args.command == "predict") {
        cmd_predict(need(args, "model"), need(args, "data"), need(args, "out"));
        std::printf("predictions written to %s\n", args.flags.at("out").c_str());
        return 0;
    }

    if (args.command == "report") {
        std::string out = args.flags.count("out") ? args.flags.at("out") : "out";
        run_report rep = cmd_evaluate(need(args, "model"), need(args, "data"), out);
        std::printf("report written to %s (%zu files)\n", out.c_str(), rep.manifest.size());
        return 0;
    }

    throw error(errc::config_error, "unknown command '" + args.command +
                                        "' (expected generate|run|predict|report)");
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_command(parse_args(argc, argv));
    } catch (const error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        switch (e.category()) {
            case error_category::config: return 2;
            case error_category::data: return 3;
            case error_category::numeric: return 4;
        }
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
