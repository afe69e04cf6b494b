#include "clinpred/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "clinpred/error.hpp"
#include "clinpred/rng.hpp"

namespace clinpred {

int dataset::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < specs.size(); ++i)
        if (specs[i].name == name) return static_cast<int>(i);
    return -1;
}

int dataset::outcome_index() const {
    for (std::size_t i = 0; i < specs.size(); ++i)
        if (specs[i].role == column_role::outcome) return static_cast<int>(i);
    return -1;
}

std::vector<std::size_t> dataset::feature_columns() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < specs.size(); ++i)
        if (specs[i].role == column_role::feature) out.push_back(i);
    return out;
}

std::size_t dataset::missing_count() const {
    std::size_t n = 0;
    for (auto m : miss) n += m;
    return n;
}

dataset dataset::take_rows(const std::vector<std::uint32_t>& positions) const {
    dataset out;
    out.specs = specs;
    out.mode = mode;
    out.n_rows = positions.size();
    const std::size_t c = specs.size();
    out.values.resize(out.n_rows * c);
    out.miss.resize(out.n_rows * c);
    out.row_ids.resize(out.n_rows);
    for (std::size_t i = 0; i < positions.size(); ++i) {
        std::size_t src = positions[i];
        std::copy_n(values.begin() + src * c, c, out.values.begin() + i * c);
        std::copy_n(miss.begin() + src * c, c, out.miss.begin() + i * c);
        out.row_ids[i] = row_ids.empty() ? static_cast<std::uint32_t>(src) : row_ids[src];
    }
    return out;
}

dataset dataset::with_shape(std::vector<column_spec> sp, std::size_t n, endpoint_mode m) {
    dataset out;
    out.specs = std::move(sp);
    out.n_rows = n;
    out.mode = m;
    out.values.assign(n * out.specs.size(), 0.0);
    out.miss.assign(n * out.specs.size(), 0);
    out.row_ids.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.row_ids[i] = static_cast<std::uint32_t>(i);
    return out;
}

// --- CSV ---------------------------------------------------------------------

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

// Kind inference: {0,1} subset -> binary; small integer code sets -> categorical;
// anything else -> continuous.
feature_kind infer_kind(const std::vector<double>& col_values, std::vector<int>& levels_out) {
    bool all01 = true, all_int = true;
    std::set<int> levels;
    for (double v : col_values) {
        if (v != 0.0 && v != 1.0) all01 = false;
        if (v != std::floor(v) || std::abs(v) > 1e6) all_int = false;
        if (all_int) levels.insert(static_cast<int>(v));
        if (!all01 && !all_int) break;
    }
    if (col_values.empty()) return feature_kind::continuous;
    if (all01) return feature_kind::binary;
    if (all_int && levels.size() >= 3 && levels.size() <= 12) {
        levels_out.assign(levels.begin(), levels.end());
        return feature_kind::categorical;
    }
    return feature_kind::continuous;
}

} // namespace

dataset parse_csv(const std::string& text, const std::optional<std::vector<column_spec>>& schema) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || trim(line).empty())
        throw error(errc::missing_header, "no header row");
    std::vector<std::string> header = split_line(line);
    for (auto& h : header) h = trim(h);
    {
        std::unordered_set<std::string> seen;
        for (const auto& h : header) {
            if (h.empty()) throw error(errc::missing_header, "empty column name in header");
            if (!seen.insert(h).second) throw error(errc::duplicate_column_name, h);
        }
    }
    // header must not itself look like a data row
    {
        bool all_numeric = true;
        for (const auto& h : header) {
            char* end = nullptr;
            std::strtod(h.c_str(), &end);
            if (end == h.c_str() || *end != '\0') { all_numeric = false; break; }
        }
        if (all_numeric) throw error(errc::missing_header, "first row is numeric, expected column names");
    }

    const std::size_t n_cols = header.size();
    std::vector<double> values;
    std::vector<std::uint8_t> miss;
    std::size_t n_rows = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> cells = split_line(line);
        if (cells.size() != n_cols) {
            throw error(errc::non_numeric_cell,
                        "row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                            " cells, expected " + std::to_string(n_cols));
        }
        for (std::size_t c = 0; c < n_cols; ++c) {
            std::string cell = trim(cells[c]);
            if (cell.empty() || cell == "NA") {
                values.push_back(0.0);
                miss.push_back(1);
                continue;
            }
            char* end = nullptr;
            double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0' || !std::isfinite(v)) {
                throw error(errc::non_numeric_cell,
                            "cell (" + std::to_string(line_no) + ", " + header[c] + "): '" + cell + "'");
            }
            values.push_back(v);
            miss.push_back(0);
        }
        ++n_rows;
    }
    if (n_rows == 0) throw error(errc::missing_data, "header only, no data rows");

    dataset ds;
    ds.n_rows = n_rows;
    ds.values = std::move(values);
    ds.miss = std::move(miss);
    if (schema) {
        if (schema->size() != n_cols)
            throw error(errc::schema_mismatch, "schema lists " + std::to_string(schema->size()) +
                                                   " columns, file has " + std::to_string(n_cols));
        ds.specs = *schema;
        for (std::size_t c = 0; c < n_cols; ++c)
            if (ds.specs[c].name != header[c])
                throw error(errc::schema_mismatch, "column " + std::to_string(c) + " is '" + header[c] +
                                                       "', schema says '" + ds.specs[c].name + "'");
    } else {
        ds.specs.resize(n_cols);
        for (std::size_t c = 0; c < n_cols; ++c) {
            ds.specs[c].name = header[c];
            std::vector<double> col;
            col.reserve(n_rows);
            for (std::size_t r = 0; r < n_rows; ++r)
                if (!ds.miss[r * n_cols + c]) col.push_back(ds.values[r * n_cols + c]);
            std::vector<int> levels;
            ds.specs[c].kind = infer_kind(col, levels);
            ds.specs[c].levels = std::move(levels);
            ds.specs[c].role = column_role::feature;
        }
    }
    ds.row_ids.resize(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) ds.row_ids[i] = static_cast<std::uint32_t>(i);
    return ds;
}

dataset load_csv(const std::string& path, const std::optional<std::vector<column_spec>>& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error(errc::io_error, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), schema);
}

std::string csv_to_string(const dataset& ds) {
    std::string out;
    for (std::size_t c = 0; c < ds.n_cols(); ++c) {
        if (c) out.push_back(',');
        out += ds.specs[c].name;
    }
    out.push_back('\n');
    char buf[40];
    for (std::size_t r = 0; r < ds.n_rows; ++r) {
        for (std::size_t c = 0; c < ds.n_cols(); ++c) {
            if (c) out.push_back(',');
            if (ds.is_missing(r, c)) {
                out += "NA";
            } else {
                std::snprintf(buf, sizeof buf, "%.17g", ds.at(r, c));
                out += buf;
            }
        }
        out.push_back('\n');
    }
    return out;
}

void write_csv(const dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error(errc::io_error, "cannot write " + path);
    out << csv_to_string(ds);
}

// --- Splitting -----------------------------------------------------------------

split_pair split_train_test(const dataset& ds, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw error(errc::invalid_spec, "split fraction must be in (0,1)");
    if (ds.n_rows < 2) throw error(errc::too_few_rows, "need at least 2 rows to split");
    const std::size_t n = ds.n_rows;
    const std::size_t n_train = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
    if (n_train == 0 || n_train == n)
        throw error(errc::empty_partition, "fraction " + std::to_string(fraction) + " leaves a partition empty");

    std::vector<std::uint32_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
    rng g(seed);
    g.shuffle(order);

    split_pair pair;
    pair.fraction = fraction;
    pair.seed = seed;
    pair.train = ds.take_rows({order.begin(), order.begin() + static_cast<long>(n_train)});
    pair.test = ds.take_rows({order.begin() + static_cast<long>(n_train), order.end()});
    return pair;
}

balance_check class_balance_check(const split_pair& pair) {
    balance_check out;
    int oc = pair.train.outcome_index();
    if (oc < 0) throw error(errc::invalid_spec, "no outcome column designated");
    auto col_stats = [&](const dataset& ds, double& mean, double& sd, double& pos) {
        double s = 0.0, s2 = 0.0, np = 0.0;
        for (std::size_t r = 0; r < ds.n_rows; ++r) {
            double v = ds.at(r, static_cast<std::size_t>(oc));
            s += v;
            s2 += v * v;
            if (v == 1.0) np += 1.0;
        }
        double n = static_cast<double>(ds.n_rows);
        mean = s / n;
        sd = n > 1 ? std::sqrt(std::max(0.0, (s2 - s * s / n) / (n - 1))) : 0.0;
        pos = np / n;
    };
    col_stats(pair.train, out.train_mean, out.train_sd, out.train_positive);
    col_stats(pair.test, out.test_mean, out.test_sd, out.test_positive);
    if (pair.train.mode == endpoint_mode::classification) {
        out.classification = true;
        out.difference = std::abs(out.train_positive - out.test_positive);
        out.warn = out.difference > 0.05;
    } else {
        out.classification = false;
        out.difference = std::abs(out.train_mean - out.test_mean);
        out.warn = out.train_sd > 0 && out.difference > 0.5 * out.train_sd;
    }
    return out;
}

// --- Sample size ----------------------------------------------------------------

sample_size_advice sample_size_check(std::size_t n_features, double incidence,
                                     std::size_t n_available, std::size_t n_positive) {
    if (n_features < 1) throw error(errc::invalid_spec, "need at least one feature");
    if (!(incidence > 0.0 && incidence < 1.0))
        throw error(errc::invalid_incidence, "incidence must be in (0,1)");
    sample_size_advice adv;
    adv.required_positives = 10 * n_features;
    adv.required_total =
        static_cast<std::size_t>(std::ceil(static_cast<double>(adv.required_positives) / incidence));
    if (n_positive < 100) {
        adv.verdict = size_verdict::not_recommended;
    } else if (n_positive < adv.required_positives || n_available < adv.required_total) {
        adv.verdict = size_verdict::insufficient;
    } else {
        adv.verdict = size_verdict::ok;
    }
    return adv;
}

} // namespace clinpred
