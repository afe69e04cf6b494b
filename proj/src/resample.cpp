#include "clinpred/resample.hpp"

#include <algorithm>

#include "clinpred/error.hpp"
#include "clinpred/rng.hpp"

namespace clinpred {

resample_index_set make_kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw error(errc::invalid_spec, "k must be >= 2");
    if (k > n) throw error(errc::k_too_large, std::to_string(k) + " folds for " + std::to_string(n) + " rows");

    std::vector<std::uint32_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
    rng g(seed);
    g.shuffle(order);

    // first n mod k folds get one extra row
    resample_index_set out(k);
    std::size_t base = n / k, extra = n % k, pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        std::size_t size = base + (f < extra ? 1 : 0);
        out[f].assessment.assign(order.begin() + static_cast<long>(pos),
                                 order.begin() + static_cast<long>(pos + size));
        pos += size;
    }
    for (std::size_t f = 0; f < k; ++f) {
        out[f].analysis.reserve(n - out[f].assessment.size());
        for (std::size_t g2 = 0; g2 < k; ++g2) {
            if (g2 == f) continue;
            out[f].analysis.insert(out[f].analysis.end(), out[g2].assessment.begin(),
                                   out[g2].assessment.end());
        }
    }
    return out;
}

resample_index_set make_bootstrap(std::size_t n, std::size_t reps, std::uint64_t seed) {
    if (n < 2) throw error(errc::too_few_rows, "bootstrap needs n >= 2");
    if (reps < 1) throw error(errc::invalid_spec, "need at least one repetition");
    resample_index_set out(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        rng g(mix_seed(seed, r));
        std::vector<std::uint8_t> drawn(n, 0);
        out[r].analysis.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            auto idx = static_cast<std::uint32_t>(g.below(n));
            out[r].analysis[i] = idx;
            drawn[idx] = 1;
        }
        for (std::size_t i = 0; i < n; ++i)
            if (!drawn[i]) out[r].assessment.push_back(static_cast<std::uint32_t>(i)); // out-of-bag
    }
    return out;
}

resample_index_set make_loocv(std::size_t n) {
    if (n < 2) throw error(errc::too_few_rows, "loocv needs n >= 2");
    resample_index_set out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].assessment = {static_cast<std::uint32_t>(i)};
        out[i].analysis.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) out[i].analysis.push_back(static_cast<std::uint32_t>(j));
    }
    return out;
}

resample_index_set expand_plan(const resampling_plan& plan, std::size_t n) {
    switch (plan.kind) {
        case resample_kind::kfold: return make_kfold(n, plan.number, plan.seed);
        case resample_kind::bootstrap: return make_bootstrap(n, plan.number, plan.seed);
        case resample_kind::loocv: return make_loocv(n);
    }
    throw error(errc::invalid_spec, "unknown resampling kind");
}

std::vector<nested_pair> make_nested(std::size_t n, const resampling_plan& outer,
                                     const resampling_plan& inner) {
    resample_index_set outer_set = expand_plan(outer, n);
    std::vector<nested_pair> out(outer_set.size());
    for (std::size_t o = 0; o < outer_set.size(); ++o) {
        out[o].outer_index = o;
        out[o].outer = outer_set[o];
        resampling_plan ip = inner;
        ip.seed = mix_seed(outer.seed, o);
        resample_index_set local = expand_plan(ip, outer_set[o].analysis.size());
        // map inner indices back into the source universe
        out[o].inner.resize(local.size());
        const auto& universe = outer_set[o].analysis;
        for (std::size_t i = 0; i < local.size(); ++i) {
            for (auto idx : local[i].analysis) out[o].inner[i].analysis.push_back(universe[idx]);
            for (auto idx : local[i].assessment) out[o].inner[i].assessment.push_back(universe[idx]);
        }
    }
    return out;
}

} // namespace clinpred
