#include "fcmdnn/error.hpp"
#include "fcmdnn/partition.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace fcmdnn;

TEST_SUITE("partition") {

TEST_CASE("ten samples over five folds") {
    const FoldPlan plan = make_fold_plan(10, 5, 3);
    REQUIRE(plan.folds.size() == 5);
    std::vector<int> all;
    for (const auto& f : plan.folds) {
        CHECK(f.test_indices.size() == 2);
        all.insert(all.end(), f.test_indices.begin(), f.test_indices.end());
    }
    std::sort(all.begin(), all.end());
    CHECK(all == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
}

TEST_CASE("earlier folds absorb the remainder") {
    const FoldPlan plan = make_fold_plan(11, 5, 3);
    std::vector<std::size_t> sizes;
    for (const auto& f : plan.folds) sizes.push_back(f.test_indices.size());
    CHECK(sizes == std::vector<std::size_t>{3, 2, 2, 2, 2});
}

TEST_CASE("stratified 50/50 over ten folds gives five of each class") {
    std::vector<int> labels(100);
    for (int i = 0; i < 100; ++i) labels[static_cast<std::size_t>(i)] = i < 50 ? 0 : 1;
    const FoldPlan plan = make_fold_plan(100, 10, 9, labels);
    CHECK(plan.stratified);
    for (const auto& f : plan.folds) {
        int sick = 0;
        for (const int i : f.test_indices) sick += labels[static_cast<std::size_t>(i)];
        CHECK(sick == 5);
        CHECK(f.test_indices.size() == 10);
    }
}

TEST_CASE("validation is a fifth of the non-test portion") {
    const FoldPlan plan = make_fold_plan(57, 7, 1);
    for (const auto& f : plan.folds) {
        const auto rest = f.train_indices.size() + f.validation_indices.size();
        CHECK(f.validation_indices.size() == static_cast<std::size_t>(std::lround(0.2 * static_cast<double>(rest))));
        CHECK(std::is_sorted(f.train_indices.begin(), f.train_indices.end()));
        CHECK(std::is_sorted(f.validation_indices.begin(), f.validation_indices.end()));
    }
}

TEST_CASE("plans are deterministic and seed-dependent") {
    const auto a = make_fold_plan(40, 5, 77);
    const auto b = make_fold_plan(40, 5, 77);
    const auto c = make_fold_plan(40, 5, 78);
    bool differs = false;
    for (std::size_t f = 0; f < 5; ++f) {
        CHECK(a.folds[f].test_indices == b.folds[f].test_indices);
        CHECK(a.folds[f].validation_indices == b.folds[f].validation_indices);
        differs = differs || a.folds[f].test_indices != c.folds[f].test_indices;
    }
    CHECK(differs);
}

TEST_CASE("invalid fold counts and label lengths") {
    auto kind = [](auto&& f) {
        try {
            f();
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::usage;
    };
    CHECK(kind([] { make_fold_plan(5, 6, 0); }) == ErrorKind::invalid_fold_count);
    CHECK(kind([] { make_fold_plan(5, 1, 0); }) == ErrorKind::invalid_fold_count);
    CHECK(kind([] { make_fold_plan(5, 2, 0, std::vector<int>{0, 1}); }) == ErrorKind::shape_mismatch);
}

TEST_CASE("coverage, disjointness and balance over the criterion grid") {
    const auto s = oracles::partition_suite(5);
    CHECK_MESSAGE(s.outcome.ok, s.outcome.detail);
    CHECK(s.plans == 11 * 3 * 2);
}

}
