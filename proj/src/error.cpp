#include "clinpred/error.hpp"

namespace clinpred {

const char* errc_name(errc c) {
    switch (c) {
        case errc::missing_header: return "MissingHeader";
        case errc::missing_data: return "MissingData";
        case errc::non_numeric_cell: return "NonNumericCell";
        case errc::duplicate_column_name: return "DuplicateColumnName";
        case errc::empty_partition: return "EmptyPartition";
        case errc::invalid_spec: return "InvalidSpec";
        case errc::invalid_incidence: return "InvalidIncidence";
        case errc::io_error: return "IoError";
        case errc::non_continuous_column: return "NonContinuousColumn";
        case errc::missing_column: return "MissingColumn";
        case errc::unknown_level: return "UnknownLevel";
        case errc::too_few_donors: return "TooFewDonors";
        case errc::schema_mismatch: return "SchemaMismatch";
        case errc::single_class: return "SingleClass";
        case errc::smote_too_few_minority: return "SmoteTooFewMinority";
        case errc::k_too_large: return "KTooLarge";
        case errc::too_few_rows: return "TooFewRows";
        case errc::degenerate_outcome: return "DegenerateOutcome";
        case errc::singular_system: return "SingularSystem";
        case errc::non_convergence: return "NonConvergence";
        case errc::sizes_out_of_range: return "SizesOutOfRange";
        case errc::rank_deficient: return "RankDeficient";
        case errc::target_unachievable: return "TargetUnachievable";
        case errc::empty_expected: return "EmptyExpected";
        case errc::zero_variance_truth: return "ZeroVarianceTruth";
        case errc::constant_feature: return "ConstantFeature";
        case errc::config_error: return "ConfigError";
        case errc::version_mismatch: return "VersionMismatch";
        case errc::checksum_mismatch: return "ChecksumMismatch";
    }
    return "UnknownError";
}

error_category errc_to_category(errc c) {
    switch (c) {
        case errc::config_error:
        case errc::invalid_spec:
        case errc::invalid_incidence:
        case errc::sizes_out_of_range:
            return error_category::config;
        case errc::degenerate_outcome:
        case errc::singular_system:
        case errc::non_convergence:
        case errc::single_class:
        case errc::zero_variance_truth:
        case errc::constant_feature:
        case errc::target_unachievable:
        case errc::empty_expected:
            return error_category::numeric;
        default:
            return error_category::data;
    }
}

} // namespace clinpred
