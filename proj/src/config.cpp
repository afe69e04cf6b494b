#include "clinpred/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "clinpred/error.hpp"

namespace clinpred {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw error(errc::config_error, key + ": expected a number, got '" + v + "'");
    return x;
}

std::size_t parse_count(const std::string& key, const std::string& v) {
    double x = parse_double(key, v);
    if (x < 0 || x != std::floor(x))
        throw error(errc::config_error, key + ": expected a non-negative integer, got '" + v + "'");
    return static_cast<std::size_t>(x);
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "off" || v == "0" || v == "no") return false;
    throw error(errc::config_error, key + ": expected true/false, got '" + v + "'");
}

// "10..20" or "10,12,14"
std::vector<std::size_t> parse_sizes(const std::string& key, const std::string& v) {
    std::vector<std::size_t> out;
    std::size_t dots = v.find("..");
    if (dots != std::string::npos) {
        std::size_t lo = parse_count(key, trim(v.substr(0, dots)));
        std::size_t hi = parse_count(key, trim(v.substr(dots + 2)));
        if (hi < lo) throw error(errc::config_error, key + ": range end below start");
        for (std::size_t s = lo; s <= hi; ++s) out.push_back(s);
        return out;
    }
    for (const auto& tok : split_list(v)) out.push_back(parse_count(key, tok));
    return out;
}

resampling_plan parse_plan(const std::string& method_key, const std::string& method,
                           std::size_t number) {
    resampling_plan plan;
    if (method == "cv") plan.kind = resample_kind::kfold;
    else if (method == "boot") plan.kind = resample_kind::bootstrap;
    else if (method == "loocv") plan.kind = resample_kind::loocv;
    else throw error(errc::config_error, method_key + ": expected cv|boot|loocv, got '" + method + "'");
    plan.number = number;
    return plan;
}

struct grid_overrides {
    std::map<std::string, std::vector<double>> values; // key after the dot -> list
};

// cartesian grid from per-model overrides, defaults filling unset axes
std::vector<hyper_point> build_grid(algorithm a, const grid_overrides& ov) {
    auto axis = [&](const char* key, std::vector<double> defaults) {
        auto it = ov.values.find(key);
        return it == ov.values.end() ? defaults : it->second;
    };
    std::vector<hyper_point> grid;
    switch (a) {
        case algorithm::random_forest: {
            auto mtries = axis("mtry", {0});
            auto trees = axis("trees", {500});
            for (double m : mtries)
                for (double t : trees) {
                    hyper_point h;
                    h.mtry = static_cast<std::size_t>(m);
                    h.n_trees = static_cast<std::size_t>(t);
                    grid.push_back(h);
                }
            break;
        }
        case algorithm::gbm: {
            auto trees = axis("trees", {50, 100, 150});
            auto depths = axis("depth", {1, 2, 3});
            auto shrinks = axis("shrinkage", {0.1});
            auto minobs = axis("min_obs", {10});
            for (double t : trees)
                for (double d : depths)
                    for (double s : shrinks)
                        for (double m : minobs) {
                            hyper_point h;
                            h.n_trees = static_cast<std::size_t>(t);
                            h.depth = static_cast<int>(d);
                            h.shrinkage = s;
                            h.min_obs = static_cast<std::size_t>(m);
                            grid.push_back(h);
                        }
            break;
        }
        case algorithm::naive_bayes: {
            auto laplaces = axis("laplace", {0, 1});
            auto kernels = axis("kernel", {0, 1});
            auto adjusts = axis("adjust", {1});
            for (double fl : laplaces)
                for (double kn : kernels)
                    for (double ad : adjusts) {
                        hyper_point h;
                        h.laplace = fl;
                        h.use_kernel = kn != 0.0;
                        h.adjust = ad;
                        grid.push_back(h);
                    }
            break;
        }
        case algorithm::knn: {
            auto ks = axis("k", {5, 9, 15, 25, 35});
            for (double k : ks) {
                hyper_point h;
                h.k = static_cast<std::size_t>(k);
                grid.push_back(h);
            }
            break;
        }
        case algorithm::ridge: {
            auto it = ov.values.find("lambda");
            if (it == ov.values.end()) return {}; // default 25-point log grid
            for (double l : it->second) {
                hyper_point h;
                h.lambda = l;
                grid.push_back(h);
            }
            break;
        }
        default:
            return {}; // glm has no grid; lasso/enet lambda paths stay data-driven
    }
    return grid;
}

} // namespace

pipeline_config parse_config_text(const std::string& text) {
    pipeline_config cfg;
    std::map<std::string, std::string> kv;
    std::map<std::string, grid_overrides> model_ov;

    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw error(errc::config_error, "line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw error(errc::config_error, "line " + std::to_string(line_no) + ": empty key or value");

        std::size_t dot = key.find('.');
        if (dot != std::string::npos && key.substr(0, dot) != "gen") {
            std::string model = key.substr(0, dot);
            std::string axis = key.substr(dot + 1);
            std::vector<double> values;
            for (const auto& tok : split_list(value)) {
                if (tok == "true") values.push_back(1);
                else if (tok == "false") values.push_back(0);
                else values.push_back(parse_double(key, tok));
            }
            model_ov[model].values[axis] = values;
            continue;
        }
        kv[key] = value;
    }

    auto take = [&](const char* key) -> std::string {
        auto it = kv.find(key);
        if (it == kv.end()) return "";
        std::string v = it->second;
        kv.erase(it);
        return v;
    };

    if (auto v = take("task"); !v.empty()) {
        if (v == "classification") cfg.task = endpoint_mode::classification;
        else if (v == "regression") cfg.task = endpoint_mode::regression;
        else throw error(errc::config_error, "task: expected classification|regression");
    }
    cfg.metric = cfg.task == endpoint_mode::classification ? tune_metric::roc : tune_metric::rmse;

    if (auto v = take("data"); !v.empty()) cfg.data_path = v;
    if (auto v = take("generate_n"); !v.empty()) cfg.generate_n = parse_count("generate_n", v);
    if (auto v = take("outcome"); !v.empty()) cfg.outcome = v;
    if (auto v = take("drop"); !v.empty()) cfg.drop = split_list(v);
    if (auto v = take("split_fraction"); !v.empty()) cfg.split_fraction = parse_double("split_fraction", v);
    if (auto v = take("seed"); !v.empty()) cfg.seed = static_cast<std::uint64_t>(parse_count("seed", v));
    if (auto v = take("threads"); !v.empty()) cfg.threads = static_cast<int>(parse_count("threads", v));
    if (auto v = take("out"); !v.empty()) cfg.out_dir = v;
    if (auto v = take("plots"); !v.empty()) cfg.emit_plots = parse_bool("plots", v);

    if (auto v = take("metric"); !v.empty()) {
        if (v == "ROC") cfg.metric = tune_metric::roc;
        else if (v == "RMSE") cfg.metric = tune_metric::rmse;
        else throw error(errc::config_error, "metric: expected ROC|RMSE");
    }

    {
        std::string method = take("resampling");
        std::string number = take("resamples");
        if (!method.empty())
            cfg.plan = parse_plan("resampling", method,
                                  number.empty() ? (method == "cv" ? 5 : 25)
                                                 : parse_count("resamples", number));
        else if (!number.empty())
            cfg.plan.number = parse_count("resamples", number);
    }

    if (auto v = take("balance"); !v.empty()) {
        if (v == "none") cfg.balance.kind = balance_kind::none;
        else if (v == "upsample" || v == "up") cfg.balance.kind = balance_kind::upsample;
        else if (v == "downsample" || v == "down") cfg.balance.kind = balance_kind::downsample;
        else if (v == "smote") cfg.balance.kind = balance_kind::smote;
        else if (v == "class_weights") cfg.balance.kind = balance_kind::class_weights;
        else throw error(errc::config_error, "balance: unknown strategy '" + v + "'");
    }
    if (auto v = take("smote_k"); !v.empty()) cfg.balance.smote_k = parse_count("smote_k", v);
    if (auto v = take("weight_negative"); !v.empty())
        cfg.balance.weight_negative = parse_double("weight_negative", v);
    if (auto v = take("weight_positive"); !v.empty())
        cfg.balance.weight_positive = parse_double("weight_positive", v);

    if (auto v = take("impute"); !v.empty()) cfg.recipe.impute = parse_bool("impute", v);
    if (auto v = take("impute_k"); !v.empty()) cfg.recipe.impute_k = parse_count("impute_k", v);
    if (auto v = take("onehot"); !v.empty()) cfg.recipe.one_hot = parse_bool("onehot", v);
    if (auto v = take("scaler"); !v.empty()) {
        if (v == "none") cfg.recipe.scale = false;
        else if (v == "zscore") cfg.recipe.scale_mode = scaler_mode::zscore;
        else if (v == "minmax") cfg.recipe.scale_mode = scaler_mode::minmax;
        else throw error(errc::config_error, "scaler: expected zscore|minmax|none");
    }

    if (auto v = take("rfe"); !v.empty()) cfg.rfe = parse_bool("rfe", v);
    if (auto v = take("rfe_sizes"); !v.empty()) cfg.rfe_sizes = parse_sizes("rfe_sizes", v);
    if (auto v = take("rfe_estimator"); !v.empty()) cfg.rfe_estimator = algorithm_from_name(v);
    {
        std::string method = take("rfe_resampling");
        std::string number = take("rfe_resamples");
        if (!method.empty())
            cfg.rfe_plan = parse_plan("rfe_resampling", method,
                                      number.empty() ? 25 : parse_count("rfe_resamples", number));
        else if (!number.empty())
            cfg.rfe_plan.number = parse_count("rfe_resamples", number);
    }

    if (auto v = take("models"); !v.empty()) {
        for (const auto& name : split_list(v)) {
            model_request req;
            std::string effective = name;
            // Table 2 spells the regression linear model "glm" as well
            if (name == "glm" && cfg.task == endpoint_mode::regression) effective = "lm";
            req.algo = algorithm_from_name(effective);
            auto it = model_ov.find(name);
            if (it != model_ov.end()) {
                if (req.algo == algorithm::elastic_net) {
                    auto al = it->second.values.find("alpha");
                    if (al != it->second.values.end()) req.enet_alphas = al->second;
                } else {
                    req.grid = build_grid(req.algo, it->second);
                }
            }
            cfg.models.push_back(std::move(req));
        }
    }

    if (auto v = take("cutoff"); !v.empty()) {
        std::size_t colon = v.find(':');
        std::string head = colon == std::string::npos ? v : v.substr(0, colon);
        std::string arg = colon == std::string::npos ? "" : v.substr(colon + 1);
        if (head == "fixed") {
            cfg.cutoff.mode = cutoff_policy::kind::fixed;
            cfg.cutoff.fixed_value = arg.empty() ? 0.5 : parse_double("cutoff", arg);
        } else if (head == "balanced") {
            cfg.cutoff.mode = cutoff_policy::kind::balanced;
        } else if (head == "rule_in") {
            cfg.cutoff.mode = cutoff_policy::kind::rule_in;
            cfg.cutoff.target = arg.empty() ? 0.9 : parse_double("cutoff", arg);
        } else if (head == "rule_out") {
            cfg.cutoff.mode = cutoff_policy::kind::rule_out;
            cfg.cutoff.target = arg.empty() ? 0.9 : parse_double("cutoff", arg);
        } else {
            throw error(errc::config_error, "cutoff: expected fixed|balanced|rule_in|rule_out");
        }
    }

    // generator overrides: gen.noise_sd, gen.<Var>.mean/.sd/.prevalence/.beta
    for (auto it = kv.begin(); it != kv.end();) {
        const std::string& key = it->first;
        if (key.rfind("gen.", 0) != 0) {
            ++it;
            continue;
        }
        std::string rest = key.substr(4);
        if (rest == "noise_sd") cfg.generator.noise_sd = parse_double(key, it->second);
        else if (rest == "survival_sd") cfg.generator.survival_sd = parse_double(key, it->second);
        else if (rest == "survival_prevalence")
            cfg.generator.survival_prevalence = parse_double(key, it->second);
        else {
            std::size_t dot = rest.find('.');
            if (dot == std::string::npos)
                throw error(errc::config_error, "unknown generator key '" + key + "'");
            std::string var = rest.substr(0, dot);
            std::string field = rest.substr(dot + 1);
            auto vit = std::find_if(cfg.generator.vars.begin(), cfg.generator.vars.end(),
                                    [&](const generator_variable& g) { return g.name == var; });
            if (vit == cfg.generator.vars.end())
                throw error(errc::config_error, "unknown generator variable '" + var + "'");
            double x = parse_double(key, it->second);
            if (field == "mean") vit->mean = x;
            else if (field == "sd") vit->sd = x;
            else if (field == "prevalence") vit->prevalence = x;
            else if (field == "beta") vit->beta = x;
            else throw error(errc::config_error, "unknown generator field '" + field + "'");
        }
        it = kv.erase(it);
    }

    if (!kv.empty()) throw error(errc::config_error, "unknown key '" + kv.begin()->first + "'");
    if (cfg.data_path.empty() && cfg.generate_n == 0)
        throw error(errc::config_error, "config needs either data = <csv> or generate_n = <count>");
    if (cfg.outcome.empty()) throw error(errc::config_error, "config needs outcome = <column>");
    if (cfg.models.empty()) throw error(errc::config_error, "config needs models = <list>");
    if (cfg.metric == tune_metric::roc && cfg.task != endpoint_mode::classification)
        throw error(errc::config_error, "metric ROC requires task = classification");
    if (cfg.metric == tune_metric::rmse && cfg.task != endpoint_mode::regression)
        throw error(errc::config_error, "metric RMSE requires task = regression");
    return cfg;
}

pipeline_config load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error(errc::config_error, "cannot open config " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

} // namespace clinpred
