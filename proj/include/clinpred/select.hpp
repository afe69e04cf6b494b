#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "clinpred/data.hpp"
#include "clinpred/linalg.hpp"
#include "clinpred/models.hpp"
#include "clinpred/resample.hpp"

namespace clinpred {

// --- Recursive feature elimination ------------------------------------------------

struct rfe_result {
    std::vector<std::size_t> sizes;
    std::vector<double> profile; // mean resampled metric per size
    matrix trace;                // sizes x resamples
    std::size_t best_size = 0;
    std::vector<std::string> selected;
};

// Per resample: rank features from a full-feature fit on the analysis rows,
// then score nested top-k subsets on the assessment rows. The final selection
// re-ranks on a full-training fit.
rfe_result rfe_run(const dataset& train, const estimator_spec& spec,
                   const std::vector<std::size_t>& sizes, const resampling_plan& plan,
                   const recipe_config& recipe_cfg, tune_metric metric, std::uint64_t seed,
                   int threads = 1);

// --- Principal components ------------------------------------------------------------

struct pca_model {
    std::vector<double> center, scale; // standardization fitted on the input
    matrix rotation;                   // p x n_components, orthonormal columns
    std::vector<double> explained;     // eigenvalues, non-increasing
    bool rank_deficient = false;
};

// Eigendecomposition of the correlation matrix; component signs are fixed by
// making each column's largest-magnitude loading positive.
pca_model pca_fit(const matrix& x, std::size_t n_components);
matrix pca_transform(const pca_model& m, const matrix& x);
// inverse in standardized space (exact when n_components = p)
matrix pca_inverse_transform(const pca_model& m, const matrix& scores);

// --- Model-free importance -------------------------------------------------------------

struct importance_entry {
    std::string feature;
    double raw = 0.0;
    double scaled = 0.0; // affine to [0, 100]
    bool constant = false;
};

struct importance_report {
    std::vector<importance_entry> entries;
};

// Classification: folded single-feature AUC max(a, 1-a). Regression: squared
// Pearson correlation with the target.
importance_report variable_importance(const dataset& train);

} // namespace clinpred
