#include "clinpred/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "clinpred/error.hpp"
#include "clinpred/rng.hpp"

namespace clinpred {

// --- Scaling ---------------------------------------------------------------------

scaler fit_scaler(const dataset& train, const std::vector<std::string>& cols, scaler_mode mode) {
    if (train.n_rows == 0) throw error(errc::missing_data, "cannot fit scaler on empty data");
    scaler s;
    s.mode = mode;
    for (const auto& name : cols) {
        int ci = train.column_index(name);
        if (ci < 0) throw error(errc::missing_column, name);
        auto c = static_cast<std::size_t>(ci);
        if (train.specs[c].kind != feature_kind::continuous)
            throw error(errc::non_continuous_column, name);
        double sum = 0.0, sum2 = 0.0;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        std::size_t n = 0;
        for (std::size_t r = 0; r < train.n_rows; ++r) {
            if (train.is_missing(r, c)) continue;
            double v = train.at(r, c);
            sum += v;
            sum2 += v * v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            ++n;
        }
        if (n == 0) throw error(errc::missing_data, name + " has no observed values");
        double mean = sum / static_cast<double>(n);
        double var = n > 1 ? std::max(0.0, (sum2 - sum * mean) / static_cast<double>(n - 1)) : 0.0;
        double sd = std::sqrt(var);
        s.columns.push_back(name);
        if (mode == scaler_mode::zscore) {
            s.center.push_back(mean);
            s.scale.push_back(sd);
            s.constant.push_back(sd > 0.0 ? 0 : 1);
        } else {
            s.center.push_back(lo);
            s.scale.push_back(hi - lo);
            s.constant.push_back(hi > lo ? 0 : 1);
        }
    }
    return s;
}

dataset apply_scaler(const scaler& s, const dataset& ds) {
    dataset out = ds;
    for (std::size_t j = 0; j < s.columns.size(); ++j) {
        int ci = out.column_index(s.columns[j]);
        if (ci < 0) throw error(errc::missing_column, s.columns[j]);
        auto c = static_cast<std::size_t>(ci);
        for (std::size_t r = 0; r < out.n_rows; ++r) {
            if (out.is_missing(r, c)) continue; // missing entries stay missing
            double v = out.at(r, c);
            out.at(r, c) = s.constant[j] ? 0.0 : (v - s.center[j]) / s.scale[j];
        }
    }
    return out;
}

// --- One-hot ------------------------------------------------------------------------

namespace {

one_hot_result expand_one_hot(const one_hot_map& map, const dataset& ds, std::size_t src_col) {
    const std::size_t n_levels = map.levels.size();
    std::vector<column_spec> specs;
    specs.reserve(ds.n_cols() - 1 + n_levels);
    for (std::size_t c = 0; c < ds.n_cols(); ++c)
        if (c != src_col) specs.push_back(ds.specs[c]);
    for (const auto& name : map.produced)
        specs.push_back({name, feature_kind::binary, column_role::feature, {}});

    one_hot_result res;
    res.map = map;
    res.data = dataset::with_shape(std::move(specs), ds.n_rows, ds.mode);
    res.data.row_ids = ds.row_ids;

    const std::size_t keep = ds.n_cols() - 1;
    for (std::size_t r = 0; r < ds.n_rows; ++r) {
        std::size_t o = 0;
        for (std::size_t c = 0; c < ds.n_cols(); ++c) {
            if (c == src_col) continue;
            res.data.at(r, o) = ds.at(r, c);
            res.data.set_missing(r, o, ds.is_missing(r, c));
            ++o;
        }
        if (ds.is_missing(r, src_col)) {
            for (std::size_t l = 0; l < n_levels; ++l) res.data.set_missing(r, keep + l, true);
            continue;
        }
        int code = static_cast<int>(ds.at(r, src_col));
        auto it = std::find(map.levels.begin(), map.levels.end(), code);
        if (it == map.levels.end()) {
            // unknown level: all produced columns stay 0, row reported
            res.flagged_rows.push_back(static_cast<std::uint32_t>(r));
            continue;
        }
        res.data.at(r, keep + static_cast<std::size_t>(it - map.levels.begin())) = 1.0;
    }
    return res;
}

} // namespace

one_hot_result one_hot_encode(const dataset& ds, const std::string& col) {
    int ci = ds.column_index(col);
    if (ci < 0) throw error(errc::missing_column, col);
    auto c = static_cast<std::size_t>(ci);
    if (ds.specs[c].kind != feature_kind::categorical || ds.specs[c].levels.size() < 3) {
        // binary (or anything already dichotomous) passes through with an identity map
        one_hot_result res;
        res.data = ds;
        res.map.source = col;
        return res;
    }
    one_hot_map map;
    map.source = col;
    map.levels = ds.specs[c].levels;
    for (int l : map.levels) map.produced.push_back(col + "_" + std::to_string(l));
    return expand_one_hot(map, ds, c);
}

one_hot_result apply_one_hot(const one_hot_map& map, const dataset& ds) {
    if (map.levels.empty()) {
        one_hot_result res;
        res.data = ds;
        res.map = map;
        return res;
    }
    int ci = ds.column_index(map.source);
    if (ci < 0) throw error(errc::missing_column, map.source);
    return expand_one_hot(map, ds, static_cast<std::size_t>(ci));
}

// --- kNN imputer ---------------------------------------------------------------------

namespace {

// distance over mutually observed feature columns; huge when nothing is shared
double mixed_distance(const dataset& a, std::size_t ra, const dataset& b, std::size_t rb,
                      const std::vector<std::size_t>& cols, const std::vector<double>& center,
                      const std::vector<double>& scale, const std::vector<std::uint8_t>& is_cont) {
    double acc = 0.0;
    std::size_t used = 0;
    for (std::size_t j = 0; j < cols.size(); ++j) {
        std::size_t c = cols[j];
        if (a.is_missing(ra, c) || b.is_missing(rb, c)) continue;
        double va = a.at(ra, c), vb = b.at(rb, c);
        if (is_cont[j]) {
            double za = (va - center[j]) / scale[j];
            double zb = (vb - center[j]) / scale[j];
            acc += (za - zb) * (za - zb);
        } else {
            acc += va == vb ? 0.0 : 1.0;
        }
        ++used;
    }
    if (used == 0) return std::numeric_limits<double>::max();
    return acc / static_cast<double>(used);
}

} // namespace

knn_imputer fit_knn_imputer(const dataset& train, std::size_t k) {
    if (train.n_rows == 0) throw error(errc::missing_data, "cannot fit imputer on empty data");
    if (k < 1) throw error(errc::invalid_spec, "k must be >= 1");
    if (k > train.n_rows) throw error(errc::too_few_donors, "k exceeds reference row count");

    knn_imputer imp;
    imp.k = k;
    imp.reference = train;
    auto cols = train.feature_columns();
    imp.center.assign(cols.size(), 0.0);
    imp.scale.assign(cols.size(), 1.0);
    imp.missing_per_column.assign(train.n_cols(), 0);
    for (std::size_t c = 0; c < train.n_cols(); ++c)
        for (std::size_t r = 0; r < train.n_rows; ++r)
            if (train.is_missing(r, c)) ++imp.missing_per_column[c];

    for (std::size_t j = 0; j < cols.size(); ++j) {
        std::size_t c = cols[j];
        std::size_t observed = train.n_rows - imp.missing_per_column[c];
        if (observed < k)
            throw error(errc::too_few_donors,
                        train.specs[c].name + " has only " + std::to_string(observed) + " observed rows");
        if (train.specs[c].kind != feature_kind::continuous) continue;
        double sum = 0.0, sum2 = 0.0;
        std::size_t n = 0;
        for (std::size_t r = 0; r < train.n_rows; ++r) {
            if (train.is_missing(r, c)) continue;
            double v = train.at(r, c);
            sum += v;
            sum2 += v * v;
            ++n;
        }
        double mean = sum / static_cast<double>(n);
        double var = n > 1 ? std::max(0.0, (sum2 - sum * mean) / static_cast<double>(n - 1)) : 0.0;
        imp.center[j] = mean;
        imp.scale[j] = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    return imp;
}

impute_result impute(const knn_imputer& imp, const dataset& ds) {
    if (ds.n_cols() != imp.reference.n_cols())
        throw error(errc::schema_mismatch, "column count differs from imputer reference");
    for (std::size_t c = 0; c < ds.n_cols(); ++c)
        if (ds.specs[c].name != imp.reference.specs[c].name)
            throw error(errc::schema_mismatch, "column '" + ds.specs[c].name + "' does not match '" +
                                                   imp.reference.specs[c].name + "'");

    impute_result res;
    res.data = ds;
    res.imputed_fields.resize(ds.n_rows);

    auto cols = imp.reference.feature_columns();
    std::vector<std::uint8_t> is_cont(cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j)
        is_cont[j] = imp.reference.specs[cols[j]].kind == feature_kind::continuous ? 1 : 0;

    std::vector<std::pair<double, std::uint32_t>> dist;
    for (std::size_t r = 0; r < ds.n_rows; ++r) {
        std::vector<std::size_t> holes;
        for (std::size_t c = 0; c < ds.n_cols(); ++c)
            if (ds.is_missing(r, c)) holes.push_back(c);
        if (holes.empty()) continue;

        dist.clear();
        dist.reserve(imp.reference.n_rows);
        for (std::size_t q = 0; q < imp.reference.n_rows; ++q)
            dist.emplace_back(mixed_distance(ds, r, imp.reference, q, cols, imp.center, imp.scale, is_cont),
                              static_cast<std::uint32_t>(q));
        // ties break toward the lowest reference row index
        std::sort(dist.begin(), dist.end());

        for (std::size_t c : holes) {
            std::size_t taken = 0;
            double sum = 0.0;
            std::map<int, std::size_t> counts;
            for (const auto& [d, q] : dist) {
                if (imp.reference.is_missing(q, c)) continue; // donor must carry the value
                double v = imp.reference.at(q, c);
                if (res.data.specs[c].kind == feature_kind::continuous) {
                    sum += v;
                } else {
                    ++counts[static_cast<int>(v)];
                }
                if (++taken == imp.k) break;
            }
            if (taken == 0) throw error(errc::too_few_donors, "no donors for " + res.data.specs[c].name);
            double filled;
            if (res.data.specs[c].kind == feature_kind::continuous) {
                filled = sum / static_cast<double>(taken);
            } else {
                // mode of donors; ties take the smallest level code
                auto best = counts.begin();
                for (auto it = counts.begin(); it != counts.end(); ++it)
                    if (it->second > best->second) best = it;
                filled = static_cast<double>(best->first);
            }
            res.data.at(r, c) = filled;
            res.data.set_missing(r, c, false);
            res.imputed_fields[r].push_back(res.data.specs[c].name);
        }
    }
    return res;
}

// --- Rebalancing ---------------------------------------------------------------------

rebalance_result rebalance(const dataset& train, const balance_strategy& strategy, std::uint64_t seed) {
    rebalance_result res;
    res.data = train;
    if (strategy.kind == balance_kind::none) return res;

    if (train.mode != endpoint_mode::classification)
        throw error(errc::invalid_spec, "rebalancing applies to classification endpoints");
    int oc = train.outcome_index();
    if (oc < 0) throw error(errc::invalid_spec, "no outcome column designated");
    auto c = static_cast<std::size_t>(oc);

    std::vector<std::uint32_t> pos, neg;
    for (std::size_t r = 0; r < train.n_rows; ++r)
        (train.at(r, c) == 1.0 ? pos : neg).push_back(static_cast<std::uint32_t>(r));
    if (pos.empty() || neg.empty()) throw error(errc::single_class, "both classes required");

    if (strategy.kind == balance_kind::class_weights) {
        if (!(strategy.weight_negative > 0.0 && strategy.weight_positive > 0.0))
            throw error(errc::invalid_spec, "class weights must be > 0");
        res.row_weights.resize(train.n_rows);
        for (std::size_t r = 0; r < train.n_rows; ++r)
            res.row_weights[r] =
                train.at(r, c) == 1.0 ? strategy.weight_positive : strategy.weight_negative;
        return res;
    }

    const auto& minority = pos.size() <= neg.size() ? pos : neg;
    const auto& majority = pos.size() <= neg.size() ? neg : pos;
    rng g(seed);

    if (strategy.kind == balance_kind::upsample) {
        // copy random minority rows until parity
        std::vector<std::uint32_t> keep(train.n_rows);
        std::iota(keep.begin(), keep.end(), 0u);
        for (std::size_t i = minority.size(); i < majority.size(); ++i)
            keep.push_back(minority[g.below(minority.size())]);
        res.data = train.take_rows(keep);
        return res;
    }

    if (strategy.kind == balance_kind::downsample) {
        std::vector<std::uint32_t> sampled = majority;
        g.shuffle(sampled);
        sampled.resize(minority.size());
        std::vector<std::uint8_t> in_keep(train.n_rows, 0);
        for (auto r : minority) in_keep[r] = 1;
        for (auto r : sampled) in_keep[r] = 1;
        std::vector<std::uint32_t> keep;
        for (std::size_t r = 0; r < train.n_rows; ++r)
            if (in_keep[r]) keep.push_back(static_cast<std::uint32_t>(r));
        res.data = train.take_rows(keep);
        return res;
    }

    // SMOTE: synthetic rows on segments between a minority row and one of its
    // k nearest minority neighbors.
    if (minority.size() <= strategy.smote_k)
        throw error(errc::smote_too_few_minority,
                    std::to_string(minority.size()) + " minority rows for k=" + std::to_string(strategy.smote_k));

    auto cols = train.feature_columns();
    std::vector<std::uint8_t> is_cont(cols.size());
    std::vector<double> center(cols.size(), 0.0), scale(cols.size(), 1.0);
    for (std::size_t j = 0; j < cols.size(); ++j) {
        std::size_t cc = cols[j];
        is_cont[j] = train.specs[cc].kind == feature_kind::continuous ? 1 : 0;
        if (!is_cont[j]) continue;
        double sum = 0.0, sum2 = 0.0;
        std::size_t n = 0;
        for (std::size_t r = 0; r < train.n_rows; ++r) {
            if (train.is_missing(r, cc)) continue;
            sum += train.at(r, cc);
            sum2 += train.at(r, cc) * train.at(r, cc);
            ++n;
        }
        double mean = n ? sum / static_cast<double>(n) : 0.0;
        double var = n > 1 ? std::max(0.0, (sum2 - sum * mean) / static_cast<double>(n - 1)) : 0.0;
        center[j] = mean;
        scale[j] = var > 0.0 ? std::sqrt(var) : 1.0;
    }

    // neighbor lists among minority rows
    std::vector<std::vector<std::uint32_t>> neighbors(minority.size());
    for (std::size_t i = 0; i < minority.size(); ++i) {
        std::vector<std::pair<double, std::uint32_t>> dist;
        dist.reserve(minority.size() - 1);
        for (std::size_t j = 0; j < minority.size(); ++j) {
            if (j == i) continue;
            dist.emplace_back(mixed_distance(train, minority[i], train, minority[j], cols, center,
                                             scale, is_cont),
                              minority[j]);
        }
        std::sort(dist.begin(), dist.end());
        for (std::size_t j = 0; j < strategy.smote_k && j < dist.size(); ++j)
            neighbors[i].push_back(dist[j].second);
    }

    dataset out = train;
    const std::size_t n_new = majority.size() - minority.size();
    const std::size_t width = train.n_cols();
    out.values.reserve((train.n_rows + n_new) * width);
    out.miss.reserve((train.n_rows + n_new) * width);
    for (std::size_t s = 0; s < n_new; ++s) {
        std::size_t i = g.below(minority.size());
        std::uint32_t a = minority[i];
        std::uint32_t b = neighbors[i][g.below(neighbors[i].size())];
        double u = g.uniform();
        for (std::size_t cc = 0; cc < width; ++cc) {
            double va = train.at(a, cc), vb = train.at(b, cc);
            double v = cc == c ? va : va + u * (vb - va); // outcome stays the minority class
            out.values.push_back(v);
            out.miss.push_back(0);
        }
        out.row_ids.push_back(train.row_ids[a]); // synthetic rows inherit seed-row provenance
    }
    out.n_rows = train.n_rows + n_new;
    res.data = std::move(out);
    return res;
}

// --- Recipe -------------------------------------------------------------------------

dataset project_features(const dataset& ds, const std::vector<column_spec>& wanted) {
    dataset out = dataset::with_shape(wanted, ds.n_rows, ds.mode);
    out.row_ids = ds.row_ids;
    for (std::size_t j = 0; j < wanted.size(); ++j) {
        int ci = ds.column_index(wanted[j].name);
        if (ci < 0) throw error(errc::schema_mismatch, "missing column '" + wanted[j].name + "'");
        auto c = static_cast<std::size_t>(ci);
        for (std::size_t r = 0; r < ds.n_rows; ++r) {
            out.at(r, j) = ds.at(r, c);
            out.set_missing(r, j, ds.is_missing(r, c));
        }
    }
    return out;
}

recipe fit_recipe(const dataset& train, const recipe_config& config) {
    recipe r;
    r.config = config;
    for (const auto& s : train.specs)
        if (s.role == column_role::feature) r.input_specs.push_back(s);
    r.fit_row_ids = train.row_ids;
    r.fingerprint = fnv1a64(r.fit_row_ids.data(), r.fit_row_ids.size() * sizeof(std::uint32_t));

    // all statistics come from the feature columns of the fit data only
    dataset staged = project_features(train, r.input_specs);
    if (config.impute) {
        r.imputer = fit_knn_imputer(staged, config.impute_k);
        r.has_imputer = true;
        staged = impute(r.imputer, staged).data;
    }
    if (config.one_hot) {
        for (std::size_t c = 0; c < staged.n_cols();) {
            const auto& sp = staged.specs[c];
            if (sp.kind == feature_kind::categorical && sp.levels.size() >= 3) {
                one_hot_result enc = one_hot_encode(staged, sp.name);
                r.one_hot_maps.push_back(enc.map);
                staged = std::move(enc.data);
                continue; // column replaced; re-examine the same position
            }
            ++c;
        }
    }
    if (config.scale) {
        std::vector<std::string> cont;
        for (const auto& sp : staged.specs)
            if (sp.kind == feature_kind::continuous) cont.push_back(sp.name);
        if (!cont.empty()) {
            r.scale = fit_scaler(staged, cont, config.scale_mode);
            r.has_scaler = true;
        }
    }
    return r;
}

applied_recipe apply_recipe(const recipe& r, const dataset& ds, bool is_training, std::uint64_t seed) {
    applied_recipe out;
    dataset staged = project_features(ds, r.input_specs);
    out.imputed_fields.resize(ds.n_rows);
    if (r.has_imputer) {
        impute_result ir = impute(r.imputer, staged);
        staged = std::move(ir.data);
        out.imputed_fields = std::move(ir.imputed_fields);
    }
    for (const auto& map : r.one_hot_maps) {
        one_hot_result enc = apply_one_hot(map, staged);
        staged = std::move(enc.data);
        for (auto row : enc.flagged_rows) out.unknown_level_rows.push_back(row);
    }
    if (r.has_scaler) staged = apply_scaler(r.scale, staged);

    // reattach the outcome column when the incoming data carries one
    int oc = ds.outcome_index();
    if (oc >= 0) {
        auto c = static_cast<std::size_t>(oc);
        std::vector<column_spec> specs = staged.specs;
        specs.push_back(ds.specs[c]);
        dataset with_outcome = dataset::with_shape(std::move(specs), staged.n_rows, ds.mode);
        with_outcome.row_ids = staged.row_ids;
        for (std::size_t row = 0; row < staged.n_rows; ++row) {
            for (std::size_t j = 0; j < staged.n_cols(); ++j) {
                with_outcome.at(row, j) = staged.at(row, j);
                with_outcome.set_missing(row, j, staged.is_missing(row, j));
            }
            with_outcome.at(row, staged.n_cols()) = ds.at(row, c);
            with_outcome.set_missing(row, staged.n_cols(), ds.is_missing(row, c));
        }
        staged = std::move(with_outcome);
    }

    if (is_training && r.config.balance.kind != balance_kind::none) {
        rebalance_result rb = rebalance(staged, r.config.balance, seed);
        staged = std::move(rb.data);
        out.row_weights = std::move(rb.row_weights);
    }
    out.data = std::move(staged);
    return out;
}

} // namespace clinpred
