#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>

#include "clinpred/error.hpp"
#include "clinpred/resample.hpp"
#include "clinpred/rng.hpp"

using namespace clinpred;

namespace {

void check_pair_disjoint(const resample_pair& p) {
    std::set<std::uint32_t> analysis(p.analysis.begin(), p.analysis.end());
    for (auto i : p.assessment) CHECK(analysis.count(i) == 0);
}

} // namespace

TEST_CASE("kfold fold sizes and partition") {
    auto folds = make_kfold(10, 5, 1);
    REQUIRE(folds.size() == 5);
    for (const auto& f : folds) CHECK(f.assessment.size() == 2);

    auto uneven = make_kfold(11, 5, 1);
    std::vector<std::size_t> sizes;
    for (const auto& f : uneven) sizes.push_back(f.assessment.size());
    CHECK(sizes == std::vector<std::size_t>{3, 2, 2, 2, 2});

    CHECK_THROWS_AS(make_kfold(3, 5, 1), error); // KTooLarge
}

TEST_CASE("kfold assessment sets partition the index range (property)") {
    rng g(99);
    for (int rep = 0; rep < 100; ++rep) {
        std::size_t n = 2 + g.below(300);
        std::size_t k = 2 + g.below(std::min<std::size_t>(n - 1, 10));
        auto folds = make_kfold(n, k, g.next_u64());
        std::set<std::uint32_t> seen;
        for (const auto& f : folds) {
            check_pair_disjoint(f);
            CHECK(f.analysis.size() == n - f.assessment.size());
            for (auto i : f.assessment) CHECK(seen.insert(i).second); // disjoint between folds
        }
        CHECK(seen.size() == n); // complete
    }
}

TEST_CASE("kfold determinism") {
    auto a = make_kfold(10000, 5, 7);
    auto b = make_kfold(10000, 5, 7);
    for (std::size_t f = 0; f < a.size(); ++f) {
        CHECK(a[f].analysis == b[f].analysis);
        CHECK(a[f].assessment == b[f].assessment);
    }
}

TEST_CASE("bootstrap draws n with replacement, assessment is out-of-bag") {
    auto reps = make_bootstrap(100, 25, 3);
    REQUIRE(reps.size() == 25);
    for (const auto& p : reps) {
        CHECK(p.analysis.size() == 100);
        check_pair_disjoint(p);
        // any undrawn row must appear in the assessment set
        std::set<std::uint32_t> drawn(p.analysis.begin(), p.analysis.end());
        std::set<std::uint32_t> oob(p.assessment.begin(), p.assessment.end());
        for (std::uint32_t i = 0; i < 100; ++i)
            CHECK(oob.count(i) == (drawn.count(i) ? 0u : 1u));
    }
}

TEST_CASE("bootstrap unique fraction approaches 1 - 1/e") {
    auto reps = make_bootstrap(10000, 25, 11);
    double mean_unique = 0.0;
    for (const auto& p : reps) {
        std::set<std::uint32_t> uniq(p.analysis.begin(), p.analysis.end());
        mean_unique += static_cast<double>(uniq.size()) / 10000.0;
    }
    mean_unique /= 25.0;
    CHECK(mean_unique == doctest::Approx(0.632).epsilon(0.02 / 0.632));
}

TEST_CASE("loocv structure") {
    auto pairs = make_loocv(3);
    REQUIRE(pairs.size() == 3);
    std::set<std::uint32_t> assessed;
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(pairs[i].assessment == std::vector<std::uint32_t>{static_cast<std::uint32_t>(i)});
        CHECK(pairs[i].analysis.size() == 2);
        assessed.insert(pairs[i].assessment.begin(), pairs[i].assessment.end());
    }
    CHECK(assessed.size() == 3);
    CHECK_THROWS_AS(make_loocv(1), error); // TooFewRows
}

TEST_CASE("nested expansion stays inside the outer analysis set") {
    resampling_plan outer{resample_kind::kfold, 5, 17};
    resampling_plan inner{resample_kind::kfold, 5, 0};
    auto nested = make_nested(100, outer, inner);
    REQUIRE(nested.size() == 5);
    std::size_t total_inner = 0;
    for (const auto& np : nested) {
        std::set<std::uint32_t> universe(np.outer.analysis.begin(), np.outer.analysis.end());
        for (const auto& ip : np.inner) {
            ++total_inner;
            for (auto i : ip.analysis) CHECK(universe.count(i) == 1);
            for (auto i : ip.assessment) CHECK(universe.count(i) == 1);
            check_pair_disjoint(ip);
        }
    }
    CHECK(total_inner == 25);

    auto again = make_nested(100, outer, inner);
    for (std::size_t o = 0; o < nested.size(); ++o)
        for (std::size_t i = 0; i < nested[o].inner.size(); ++i) {
            CHECK(nested[o].inner[i].analysis == again[o].inner[i].analysis);
            CHECK(nested[o].inner[i].assessment == again[o].inner[i].assessment);
        }
}
