#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace clinpred {

enum class feature_kind { continuous, binary, categorical };
enum class column_role { feature, outcome, ignored };
enum class endpoint_mode { classification, regression };

struct column_spec {
    std::string name;
    feature_kind kind = feature_kind::continuous;
    column_role role = column_role::feature;
    std::vector<int> levels; // categorical only, sorted ascending
};

// Columnar table of typed numeric features with a missing-value mask.
// Immutable once built: every operation returns a new dataset. row_ids track
// provenance back to the source table so leakage audits can intersect fitted
// rows with assessment rows.
struct dataset {
    std::vector<column_spec> specs;
    std::size_t n_rows = 0;
    std::vector<double> values;      // row-major, n_rows x specs.size()
    std::vector<std::uint8_t> miss;  // same shape, 1 = missing
    endpoint_mode mode = endpoint_mode::classification;
    std::vector<std::uint32_t> row_ids;

    std::size_t n_cols() const { return specs.size(); }
    double at(std::size_t r, std::size_t c) const { return values[r * specs.size() + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * specs.size() + c]; }
    bool is_missing(std::size_t r, std::size_t c) const { return miss[r * specs.size() + c] != 0; }
    void set_missing(std::size_t r, std::size_t c, bool m = true) { miss[r * specs.size() + c] = m ? 1 : 0; }

    int column_index(const std::string& name) const;
    int outcome_index() const; // -1 when no outcome designated
    std::vector<std::size_t> feature_columns() const;
    std::size_t missing_count() const;

    dataset take_rows(const std::vector<std::uint32_t>& positions) const;
    static dataset with_shape(std::vector<column_spec> specs, std::size_t n_rows,
                              endpoint_mode mode = endpoint_mode::classification);
};

// --- CSV -------------------------------------------------------------------
// Dialect: comma separated, one header row, "NA" or empty cell = missing.

dataset load_csv(const std::string& path, const std::optional<std::vector<column_spec>>& schema = std::nullopt);
dataset parse_csv(const std::string& text, const std::optional<std::vector<column_spec>>& schema = std::nullopt);
void write_csv(const dataset& ds, const std::string& path);
std::string csv_to_string(const dataset& ds);

// --- Splitting -------------------------------------------------------------

struct split_pair {
    dataset train;
    dataset test;
    double fraction = 0.0;
    std::uint64_t seed = 0;
};

// Seeded shuffle then cut; |train| = floor(fraction * n).
split_pair split_train_test(const dataset& ds, double fraction, std::uint64_t seed);

struct balance_check {
    bool classification = true;
    double train_positive = 0.0, test_positive = 0.0; // positive-class proportion
    double train_mean = 0.0, test_mean = 0.0;         // regression
    double train_sd = 0.0, test_sd = 0.0;
    double difference = 0.0;
    bool warn = false;
};

balance_check class_balance_check(const split_pair& pair);

// --- Synthetic glioblastoma cohort ------------------------------------------

struct generator_variable {
    std::string name;
    bool binary = false;
    double mean = 0.0, sd = 1.0;      // continuous
    double prevalence = 0.5;          // binary
    double beta = 0.0;                // weight in the standardized linear predictor
    double lo = -1e308, hi = 1e308;   // clamp bounds
};

struct generator_spec {
    std::vector<generator_variable> vars;
    double noise_sd = 0.82;           // calibrated once by simulation, see generator.cpp
    double survival_sd = 3.1;
    double survival_threshold = 12.0;
    double survival_prevalence = 0.518; // fraction of rows at or above the threshold
    double survival_floor = 0.1;
    static generator_spec defaults();
};

dataset generate_synthetic_cohort(std::size_t n, std::uint64_t seed,
                                  const generator_spec& spec = generator_spec::defaults());

// --- Sample size rule of thumb ----------------------------------------------

enum class size_verdict { ok, insufficient, not_recommended };

struct sample_size_advice {
    std::size_t required_positives = 0;
    std::size_t required_total = 0;
    size_verdict verdict = size_verdict::ok;
};

sample_size_advice sample_size_check(std::size_t n_features, double incidence,
                                     std::size_t n_available, std::size_t n_positive);

} // namespace clinpred
