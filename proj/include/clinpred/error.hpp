#pragma once

#include <stdexcept>
#include <string>

namespace clinpred {

enum class errc {
    // data
    missing_header,
    missing_data,
    non_numeric_cell,
    duplicate_column_name,
    empty_partition,
    invalid_spec,
    invalid_incidence,
    io_error,
    // preprocess
    non_continuous_column,
    missing_column,
    unknown_level,
    too_few_donors,
    schema_mismatch,
    single_class,
    smote_too_few_minority,
    // resample
    k_too_large,
    too_few_rows,
    // models / numerics
    degenerate_outcome,
    singular_system,
    non_convergence,
    sizes_out_of_range,
    rank_deficient,
    target_unachievable,
    empty_expected,
    zero_variance_truth,
    constant_feature,
    // cli
    config_error,
    version_mismatch,
    checksum_mismatch,
};

// Coarse category used by the CLI to pick an exit code.
enum class error_category { config, data, numeric };

const char* errc_name(errc c);
error_category errc_to_category(errc c);

class error : public std::runtime_error {
public:
    error(errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

    errc code() const { return code_; }
    error_category category() const { return errc_to_category(code_); }

private:
    errc code_;
};

} // namespace clinpred
