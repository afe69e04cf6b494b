#pragma once

#include <cstdint>
#include <vector>

namespace clinpred {

enum class resample_kind { kfold, bootstrap, loocv };

struct resampling_plan {
    resample_kind kind = resample_kind::kfold;
    std::size_t number = 5; // folds for kfold, repetitions for bootstrap; ignored for loocv
    std::uint64_t seed = 0;
};

// One analysis/assessment index pair over 0..n-1. Analysis may be a multiset
// (bootstrap); assessment never overlaps it.
struct resample_pair {
    std::vector<std::uint32_t> analysis;
    std::vector<std::uint32_t> assessment;
};

using resample_index_set = std::vector<resample_pair>;

resample_index_set make_kfold(std::size_t n, std::size_t k, std::uint64_t seed);
resample_index_set make_bootstrap(std::size_t n, std::size_t reps, std::uint64_t seed);
resample_index_set make_loocv(std::size_t n);
resample_index_set expand_plan(const resampling_plan& plan, std::size_t n);

struct nested_pair {
    std::size_t outer_index = 0;
    resample_pair outer;
    resample_index_set inner; // indices are into the *source* universe, contained in outer.analysis
};

// Inner plans are expanded over each outer analysis set; inner seeds derive
// from (outer seed, outer ordinal) so the expansion is a pure function.
std::vector<nested_pair> make_nested(std::size_t n, const resampling_plan& outer,
                                     const resampling_plan& inner);

} // namespace clinpred
