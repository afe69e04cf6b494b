#include "clinpred/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "clinpred/error.hpp"
#include "clinpred/rng.hpp"

namespace clinpred {

namespace {

constexpr int kFormatVersion = 1;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string escape_name(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '\\') out += "\\\\";
        else if (c == ' ') out += "\\s";
        else if (c == '\t') out += "\\t";
        else if (c == '\n' || c == '\r') out += "\\s"; // never legal in a header anyway
        else out += c;
    }
    return out;
}

std::string unescape_name(const std::string& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
            char c = s[i + 1];
            out += c == 's' ? ' ' : c == 't' ? '\t' : c;
            ++i;
        } else {
            out += s[i];
        }
    }
    return out;
}

const char* kind_code(feature_kind k) {
    switch (k) {
        case feature_kind::continuous: return "c";
        case feature_kind::binary: return "b";
        case feature_kind::categorical: return "g";
    }
    return "c";
}

feature_kind kind_from_code(const std::string& s) {
    if (s == "c") return feature_kind::continuous;
    if (s == "b") return feature_kind::binary;
    if (s == "g") return feature_kind::categorical;
    throw error(errc::checksum_mismatch, "bad kind code '" + s + "'");
}

const char* role_code(column_role r) {
    switch (r) {
        case column_role::feature: return "f";
        case column_role::outcome: return "o";
        case column_role::ignored: return "i";
    }
    return "f";
}

column_role role_from_code(const std::string& s) {
    if (s == "f") return column_role::feature;
    if (s == "o") return column_role::outcome;
    if (s == "i") return column_role::ignored;
    throw error(errc::checksum_mismatch, "bad role code '" + s + "'");
}

void write_column_spec(std::ostringstream& out, const char* tag, const column_spec& sp) {
    out << tag << ' ' << kind_code(sp.kind) << ' ' << role_code(sp.role) << ' ' << sp.levels.size();
    for (int l : sp.levels) out << ' ' << l;
    out << ' ' << escape_name(sp.name) << '\n';
}

column_spec read_column_spec(std::istringstream& line) {
    column_spec sp;
    std::string kind, role, name;
    std::size_t n_levels = 0;
    line >> kind >> role >> n_levels;
    sp.kind = kind_from_code(kind);
    sp.role = role_from_code(role);
    sp.levels.resize(n_levels);
    for (auto& l : sp.levels) line >> l;
    line >> name;
    sp.name = unescape_name(name);
    return sp;
}

void write_dataset(std::ostringstream& out, const char* tag, const dataset& ds) {
    out << tag << ' ' << ds.n_rows << ' ' << ds.n_cols() << ' '
        << (ds.mode == endpoint_mode::classification ? "c" : "r") << '\n';
    for (const auto& sp : ds.specs) write_column_spec(out, "col", sp);
    for (std::size_t r = 0; r < ds.n_rows; ++r) {
        out << "row";
        for (std::size_t c = 0; c < ds.n_cols(); ++c) {
            if (ds.is_missing(r, c)) out << " NA";
            else out << ' ' << fmt(ds.at(r, c));
        }
        out << '\n';
    }
}

class line_reader {
public:
    explicit line_reader(const std::string& text) : in_(text) {}

    // next non-empty line as a token stream; throws on EOF
    std::istringstream next(const std::string& expected_tag = "") {
        std::string line;
        while (std::getline(in_, line)) {
            if (line.empty()) continue;
            std::istringstream ls(line);
            if (!expected_tag.empty()) {
                std::string tag;
                ls >> tag;
                if (tag != expected_tag)
                    throw error(errc::checksum_mismatch,
                                "expected '" + expected_tag + "', found '" + tag + "'");
            }
            return ls;
        }
        throw error(errc::checksum_mismatch, "unexpected end of model file");
    }

private:
    std::istringstream in_;
};

dataset read_dataset(line_reader& in, const char* tag) {
    auto head = in.next(tag);
    std::size_t n_rows = 0, n_cols = 0;
    std::string mode;
    head >> n_rows >> n_cols >> mode;
    std::vector<column_spec> specs;
    for (std::size_t c = 0; c < n_cols; ++c) {
        auto ls = in.next("col");
        specs.push_back(read_column_spec(ls));
    }
    dataset ds = dataset::with_shape(std::move(specs), n_rows,
                                     mode == "c" ? endpoint_mode::classification
                                                 : endpoint_mode::regression);
    for (std::size_t r = 0; r < n_rows; ++r) {
        auto ls = in.next("row");
        for (std::size_t c = 0; c < n_cols; ++c) {
            std::string cell;
            ls >> cell;
            if (cell == "NA") ds.set_missing(r, c, true);
            else ds.at(r, c) = std::strtod(cell.c_str(), nullptr);
        }
    }
    return ds;
}

void write_double_list(std::ostringstream& out, const char* tag, const std::vector<double>& v) {
    out << tag << ' ' << v.size();
    for (double x : v) out << ' ' << fmt(x);
    out << '\n';
}

std::vector<double> read_double_list(line_reader& in, const char* tag) {
    auto ls = in.next(tag);
    std::size_t n = 0;
    ls >> n;
    std::vector<double> v(n);
    for (auto& x : v) {
        std::string cell;
        ls >> cell;
        x = std::strtod(cell.c_str(), nullptr);
    }
    return v;
}

void write_tree(std::ostringstream& out, const decision_tree& t) {
    out << "tree " << t.nodes.size() << '\n';
    for (const auto& n : t.nodes)
        out << "node " << n.feature << ' ' << fmt(n.threshold) << ' ' << n.left << ' ' << n.right
            << ' ' << fmt(n.value) << '\n';
}

decision_tree read_tree(line_reader& in) {
    auto head = in.next("tree");
    std::size_t count = 0;
    head >> count;
    decision_tree t;
    t.nodes.resize(count);
    for (auto& n : t.nodes) {
        auto ls = in.next("node");
        std::string thr, val;
        ls >> n.feature >> thr >> n.left >> n.right >> val;
        n.threshold = std::strtod(thr.c_str(), nullptr);
        n.value = std::strtod(val.c_str(), nullptr);
    }
    return t;
}

const char* balance_code(balance_kind k) {
    switch (k) {
        case balance_kind::none: return "none";
        case balance_kind::upsample: return "up";
        case balance_kind::downsample: return "down";
        case balance_kind::smote: return "smote";
        case balance_kind::class_weights: return "weights";
    }
    return "none";
}

balance_kind balance_from_code(const std::string& s) {
    if (s == "none") return balance_kind::none;
    if (s == "up") return balance_kind::upsample;
    if (s == "down") return balance_kind::downsample;
    if (s == "smote") return balance_kind::smote;
    if (s == "weights") return balance_kind::class_weights;
    throw error(errc::checksum_mismatch, "bad balance code '" + s + "'");
}

} // namespace

std::string serialize_model(const fitted_model& m) {
    std::ostringstream out;
    out << "clinpred-model " << kFormatVersion << '\n';
    out << "algorithm " << algorithm_name(m.algo) << '\n';
    out << "mode " << (m.mode == endpoint_mode::classification ? "c" : "r") << '\n';
    out << "outcome " << escape_name(m.outcome_name) << '\n';
    out << "cutoff " << fmt(m.cutoff) << '\n';
    const auto& h = m.hyper;
    out << "hyper " << fmt(h.lambda) << ' ' << fmt(h.alpha) << ' ' << h.mtry << ' ' << h.n_trees
        << ' ' << h.depth << ' ' << fmt(h.shrinkage) << ' ' << h.min_obs << ' ' << fmt(h.laplace)
        << ' ' << (h.use_kernel ? 1 : 0) << ' ' << fmt(h.adjust) << ' ' << h.k << '\n';

    out << "design_columns " << m.design_columns.size();
    for (const auto& name : m.design_columns) out << ' ' << escape_name(name);
    out << '\n';

    out << "ranges " << m.ranges.size() << '\n';
    for (const auto& fr : m.ranges) {
        if (fr.kind == feature_kind::continuous) {
            out << "range c " << fmt(fr.lo) << ' ' << fmt(fr.hi) << ' ' << escape_name(fr.name) << '\n';
        } else {
            out << "range " << (fr.kind == feature_kind::binary ? "b " : "g ") << fr.levels.size();
            for (int l : fr.levels) out << ' ' << l;
            out << ' ' << escape_name(fr.name) << '\n';
        }
    }

    const recipe& r = m.rec;
    out << "recipe_config " << (r.config.impute ? 1 : 0) << ' ' << r.config.impute_k << ' '
        << (r.config.one_hot ? 1 : 0) << ' ' << (r.config.scale ? 1 : 0) << ' '
        << (r.config.scale_mode == scaler_mode::zscore ? "z" : "m") << ' '
        << balance_code(r.config.balance.kind) << ' ' << r.config.balance.smote_k << ' '
        << fmt(r.config.balance.weight_negative) << ' ' << fmt(r.config.balance.weight_positive)
        << '\n';
    char fp[24];
    std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(r.fingerprint));
    out << "recipe_fingerprint " << fp << '\n';
    out << "input_specs " << r.input_specs.size() << '\n';
    for (const auto& sp : r.input_specs) write_column_spec(out, "ispec", sp);

    out << "has_imputer " << (r.has_imputer ? 1 : 0) << '\n';
    if (r.has_imputer) {
        out << "imputer_k " << r.imputer.k << '\n';
        write_double_list(out, "imputer_center", r.imputer.center);
        write_double_list(out, "imputer_scale", r.imputer.scale);
        write_dataset(out, "imputer_reference", r.imputer.reference);
    }

    out << "one_hot " << r.one_hot_maps.size() << '\n';
    for (const auto& map : r.one_hot_maps) {
        out << "ohmap " << map.levels.size();
        for (int l : map.levels) out << ' ' << l;
        out << ' ' << escape_name(map.source);
        for (const auto& prod : map.produced) out << ' ' << escape_name(prod);
        out << '\n';
    }

    out << "has_scaler " << (r.has_scaler ? 1 : 0) << '\n';
    if (r.has_scaler) {
        out << "scaler " << (r.scale.mode == scaler_mode::zscore ? "z" : "m") << ' '
            << r.scale.columns.size() << '\n';
        for (std::size_t j = 0; j < r.scale.columns.size(); ++j)
            out << "scol " << fmt(r.scale.center[j]) << ' ' << fmt(r.scale.scale[j]) << ' '
                << int(r.scale.constant[j]) << ' ' << escape_name(r.scale.columns[j]) << '\n';
    }

    if (const auto* lp = std::get_if<linear_params>(&m.params)) {
        out << "params linear " << (lp->logistic ? 1 : 0) << '\n';
        write_double_list(out, "beta", lp->beta);
    } else if (const auto* nb = std::get_if<nb_params>(&m.params)) {
        out << "params nb " << (nb->use_kernel ? 1 : 0) << ' ' << fmt(nb->prior[0]) << ' '
            << fmt(nb->prior[1]) << ' ' << nb->features.size() << '\n';
        for (const auto& f : nb->features) {
            if (f.continuous) {
                out << "nbf c " << fmt(f.mean[0]) << ' ' << fmt(f.sd[0]) << ' ' << fmt(f.mean[1])
                    << ' ' << fmt(f.sd[1]) << ' ' << fmt(f.bandwidth[0]) << ' ' << fmt(f.bandwidth[1])
                    << '\n';
                write_double_list(out, "kern0", f.kernel_values[0]);
                write_double_list(out, "kern1", f.kernel_values[1]);
            } else {
                out << "nbf d " << f.levels.size();
                for (int l : f.levels) out << ' ' << l;
                out << '\n';
                write_double_list(out, "logp0", f.level_log_prob[0]);
                write_double_list(out, "logp1", f.level_log_prob[1]);
            }
        }
    } else if (const auto* kp = std::get_if<knn_params>(&m.params)) {
        out << "params knn " << kp->k << ' ' << kp->reference.rows << ' ' << kp->reference.cols << '\n';
        out << "kcont " << kp->is_continuous.size();
        for (auto b : kp->is_continuous) out << ' ' << int(b);
        out << '\n';
        write_double_list(out, "kcenter", kp->center);
        write_double_list(out, "kscale", kp->scale);
        write_double_list(out, "koutcome", kp->ref_outcome);
        write_double_list(out, "kweight", kp->ref_weight);
        for (std::size_t i = 0; i < kp->reference.rows; ++i) {
            out << "kref";
            for (std::size_t j = 0; j < kp->reference.cols; ++j) out << ' ' << fmt(kp->reference(i, j));
            out << '\n';
        }
    } else if (const auto* fo = std::get_if<forest_params_fitted>(&m.params)) {
        out << "params forest " << (fo->forest.classification ? 1 : 0) << ' ' << fo->forest.trees.size()
            << '\n';
        for (const auto& t : fo->forest.trees) write_tree(out, t);
    } else if (const auto* gb = std::get_if<gbm_params_fitted>(&m.params)) {
        out << "params gbm " << fmt(gb->model.f0) << ' ' << fmt(gb->model.shrinkage) << ' '
            << gb->model.trees.size() << '\n';
        for (const auto& t : gb->model.trees) write_tree(out, t);
    }

    std::string body = out.str();
    char sum[24];
    std::snprintf(sum, sizeof sum, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(body.data(), body.size())));
    return body + "checksum " + sum + "\n";
}

fitted_model deserialize_model(const std::string& text) {
    // split off and verify the checksum line first
    std::size_t pos = text.rfind("checksum ");
    if (pos == std::string::npos || pos == 0)
        throw error(errc::checksum_mismatch, "model file has no checksum line");
    std::string body = text.substr(0, pos);
    std::string sum_line = text.substr(pos);
    char expected[24];
    std::snprintf(expected, sizeof expected, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(body.data(), body.size())));
    std::istringstream sl(sum_line);
    std::string tag, found;
    sl >> tag >> found;
    if (found != expected)
        throw error(errc::checksum_mismatch, "stored " + found + ", computed " + expected);

    line_reader in(body);
    fitted_model m;
    {
        auto ls = in.next("clinpred-model");
        int version = 0;
        ls >> version;
        if (version != kFormatVersion)
            throw error(errc::version_mismatch, "file version " + std::to_string(version) +
                                                    ", supported " + std::to_string(kFormatVersion));
        m.format_version = version;
    }
    {
        auto ls = in.next("algorithm");
        std::string name;
        ls >> name;
        m.algo = algorithm_from_name(name);
    }
    {
        auto ls = in.next("mode");
        std::string mode;
        ls >> mode;
        m.mode = mode == "c" ? endpoint_mode::classification : endpoint_mode::regression;
    }
    {
        auto ls = in.next("outcome");
        std::string name;
        ls >> name;
        m.outcome_name = unescape_name(name);
    }
    {
        auto ls = in.next("cutoff");
        std::string v;
        ls >> v;
        m.cutoff = std::strtod(v.c_str(), nullptr);
    }
    {
        auto ls = in.next("hyper");
        std::string lambda, alpha, shrink, laplace, adjust;
        int kernel = 0;
        ls >> lambda >> alpha >> m.hyper.mtry >> m.hyper.n_trees >> m.hyper.depth >> shrink >>
            m.hyper.min_obs >> laplace >> kernel >> adjust >> m.hyper.k;
        m.hyper.lambda = std::strtod(lambda.c_str(), nullptr);
        m.hyper.alpha = std::strtod(alpha.c_str(), nullptr);
        m.hyper.shrinkage = std::strtod(shrink.c_str(), nullptr);
        m.hyper.laplace = std::strtod(laplace.c_str(), nullptr);
        m.hyper.adjust = std::strtod(adjust.c_str(), nullptr);
        m.hyper.use_kernel = kernel != 0;
    }
    {
        auto ls = in.next("design_columns");
        std::size_t n = 0;
        ls >> n;
        for (std::size_t i = 0; i < n; ++i) {
            std::string name;
            ls >> name;
            m.design_columns.push_back(unescape_name(name));
        }
    }
    {
        auto head = in.next("ranges");
        std::size_t n = 0;
        head >> n;
        for (std::size_t i = 0; i < n; ++i) {
            auto ls = in.next("range");
            std::string kind;
            ls >> kind;
            feature_range fr;
            fr.kind = kind_from_code(kind);
            if (fr.kind == feature_kind::continuous) {
                std::string lo, hi, name;
                ls >> lo >> hi >> name;
                fr.lo = std::strtod(lo.c_str(), nullptr);
                fr.hi = std::strtod(hi.c_str(), nullptr);
                fr.name = unescape_name(name);
            } else {
                std::size_t nl = 0;
                ls >> nl;
                fr.levels.resize(nl);
                for (auto& l : fr.levels) ls >> l;
                std::string name;
                ls >> name;
                fr.name = unescape_name(name);
            }
            m.ranges.push_back(std::move(fr));
        }
    }
    {
        auto ls = in.next("recipe_config");
        int impute = 0, onehot = 0, scale = 0;
        std::string mode, balance, wneg, wpos;
        ls >> impute >> m.rec.config.impute_k >> onehot >> scale >> mode >> balance >>
            m.rec.config.balance.smote_k >> wneg >> wpos;
        m.rec.config.impute = impute != 0;
        m.rec.config.one_hot = onehot != 0;
        m.rec.config.scale = scale != 0;
        m.rec.config.scale_mode = mode == "z" ? scaler_mode::zscore : scaler_mode::minmax;
        m.rec.config.balance.kind = balance_from_code(balance);
        m.rec.config.balance.weight_negative = std::strtod(wneg.c_str(), nullptr);
        m.rec.config.balance.weight_positive = std::strtod(wpos.c_str(), nullptr);
    }
    {
        auto ls = in.next("recipe_fingerprint");
        std::string hex;
        ls >> hex;
        m.rec.fingerprint = std::strtoull(hex.c_str(), nullptr, 16);
    }
    {
        auto head = in.next("input_specs");
        std::size_t n = 0;
        head >> n;
        for (std::size_t i = 0; i < n; ++i) {
            auto ls = in.next("ispec");
            m.rec.input_specs.push_back(read_column_spec(ls));
        }
    }
    {
        auto ls = in.next("has_imputer");
        int has = 0;
        ls >> has;
        m.rec.has_imputer = has != 0;
        if (m.rec.has_imputer) {
            auto kk = in.next("imputer_k");
            kk >> m.rec.imputer.k;
            m.rec.imputer.center = read_double_list(in, "imputer_center");
            m.rec.imputer.scale = read_double_list(in, "imputer_scale");
            m.rec.imputer.reference = read_dataset(in, "imputer_reference");
        }
    }
    {
        auto head = in.next("one_hot");
        std::size_t n = 0;
        head >> n;
        for (std::size_t i = 0; i < n; ++i) {
            auto ls = in.next("ohmap");
            one_hot_map map;
            std::size_t nl = 0;
            ls >> nl;
            map.levels.resize(nl);
            for (auto& l : map.levels) ls >> l;
            std::string src;
            ls >> src;
            map.source = unescape_name(src);
            for (std::size_t l = 0; l < nl; ++l) {
                std::string prod;
                ls >> prod;
                map.produced.push_back(unescape_name(prod));
            }
            m.rec.one_hot_maps.push_back(std::move(map));
        }
    }
    {
        auto ls = in.next("has_scaler");
        int has = 0;
        ls >> has;
        m.rec.has_scaler = has != 0;
        if (m.rec.has_scaler) {
            auto head = in.next("scaler");
            std::string mode;
            std::size_t n = 0;
            head >> mode >> n;
            m.rec.scale.mode = mode == "z" ? scaler_mode::zscore : scaler_mode::minmax;
            for (std::size_t j = 0; j < n; ++j) {
                auto sc = in.next("scol");
                std::string center, scale, name;
                int constant = 0;
                sc >> center >> scale >> constant >> name;
                m.rec.scale.center.push_back(std::strtod(center.c_str(), nullptr));
                m.rec.scale.scale.push_back(std::strtod(scale.c_str(), nullptr));
                m.rec.scale.constant.push_back(static_cast<std::uint8_t>(constant));
                m.rec.scale.columns.push_back(unescape_name(name));
            }
        }
    }
    {
        auto ls = in.next("params");
        std::string type;
        ls >> type;
        if (type == "linear") {
            linear_params lp;
            int logistic = 0;
            ls >> logistic;
            lp.logistic = logistic != 0;
            lp.beta = read_double_list(in, "beta");
            m.params = std::move(lp);
        } else if (type == "nb") {
            nb_params nb;
            int kernel = 0;
            std::string p0, p1;
            std::size_t n = 0;
            ls >> kernel >> p0 >> p1 >> n;
            nb.use_kernel = kernel != 0;
            nb.prior[0] = std::strtod(p0.c_str(), nullptr);
            nb.prior[1] = std::strtod(p1.c_str(), nullptr);
            for (std::size_t i = 0; i < n; ++i) {
                auto fl = in.next("nbf");
                std::string kind;
                fl >> kind;
                nb_feature f;
                if (kind == "c") {
                    f.continuous = true;
                    std::string m0, s0, m1, s1, b0, b1;
                    fl >> m0 >> s0 >> m1 >> s1 >> b0 >> b1;
                    f.mean[0] = std::strtod(m0.c_str(), nullptr);
                    f.sd[0] = std::strtod(s0.c_str(), nullptr);
                    f.mean[1] = std::strtod(m1.c_str(), nullptr);
                    f.sd[1] = std::strtod(s1.c_str(), nullptr);
                    f.bandwidth[0] = std::strtod(b0.c_str(), nullptr);
                    f.bandwidth[1] = std::strtod(b1.c_str(), nullptr);
                    f.kernel_values[0] = read_double_list(in, "kern0");
                    f.kernel_values[1] = read_double_list(in, "kern1");
                } else {
                    f.continuous = false;
                    std::size_t nl = 0;
                    fl >> nl;
                    f.levels.resize(nl);
                    for (auto& l : f.levels) fl >> l;
                    f.level_log_prob[0] = read_double_list(in, "logp0");
                    f.level_log_prob[1] = read_double_list(in, "logp1");
                }
                nb.features.push_back(std::move(f));
            }
            m.params = std::move(nb);
        } else if (type == "knn") {
            knn_params kp;
            std::size_t rows = 0, cols = 0;
            ls >> kp.k >> rows >> cols;
            auto kc = in.next("kcont");
            std::size_t n = 0;
            kc >> n;
            kp.is_continuous.resize(n);
            for (auto& b : kp.is_continuous) {
                int v = 0;
                kc >> v;
                b = static_cast<std::uint8_t>(v);
            }
            kp.center = read_double_list(in, "kcenter");
            kp.scale = read_double_list(in, "kscale");
            kp.ref_outcome = read_double_list(in, "koutcome");
            kp.ref_weight = read_double_list(in, "kweight");
            kp.reference = matrix(rows, cols);
            for (std::size_t i = 0; i < rows; ++i) {
                auto rr = in.next("kref");
                for (std::size_t j = 0; j < cols; ++j) {
                    std::string cell;
                    rr >> cell;
                    kp.reference(i, j) = std::strtod(cell.c_str(), nullptr);
                }
            }
            m.params = std::move(kp);
        } else if (type == "forest") {
            forest_params_fitted fo;
            int classification = 0;
            std::size_t n = 0;
            ls >> classification >> n;
            fo.forest.classification = classification != 0;
            for (std::size_t i = 0; i < n; ++i) fo.forest.trees.push_back(read_tree(in));
            m.params = std::move(fo);
        } else if (type == "gbm") {
            gbm_params_fitted gb;
            std::string f0, shrink;
            std::size_t n = 0;
            ls >> f0 >> shrink >> n;
            gb.model.f0 = std::strtod(f0.c_str(), nullptr);
            gb.model.shrinkage = std::strtod(shrink.c_str(), nullptr);
            for (std::size_t i = 0; i < n; ++i) gb.model.trees.push_back(read_tree(in));
            m.params = std::move(gb);
        } else {
            throw error(errc::checksum_mismatch, "unknown params type '" + type + "'");
        }
    }
    return m;
}

void model_save(const fitted_model& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error(errc::io_error, "cannot write " + path);
    out << serialize_model(m);
    if (!out) throw error(errc::io_error, "write failed for " + path);
}

fitted_model model_load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error(errc::io_error, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_model(buf.str());
}

} // namespace clinpred
