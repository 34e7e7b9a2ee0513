#include "fcmdnn/partition.hpp"

#include "fcmdnn/error.hpp"
#include "fcmdnn/random.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

namespace fcmdnn {

FoldPlan make_fold_plan(int n, int k, std::uint64_t seed, const std::optional<std::vector<int>>& stratify_labels) {
    if (k < 2 || k > n) {
        throw Error(ErrorKind::invalid_fold_count,
                    "need 2 <= k <= n, got k=" + std::to_string(k) + " n=" + std::to_string(n));
    }
    if (stratify_labels && stratify_labels->size() != static_cast<std::size_t>(n)) {
        throw Error(ErrorKind::shape_mismatch, "stratify_labels length differs from n");
    }

    Rng rng(seed);
    std::vector<int> dealing;
    dealing.reserve(static_cast<std::size_t>(n));
    if (stratify_labels) {
        std::map<int, std::vector<int>> by_class;
        for (int i = 0; i < n; ++i) by_class[(*stratify_labels)[static_cast<std::size_t>(i)]].push_back(i);
        for (auto& [label, members] : by_class) {
            rng.shuffle(std::span<int>(members));
            dealing.insert(dealing.end(), members.begin(), members.end());
        }
    } else {
        dealing.resize(static_cast<std::size_t>(n));
        std::iota(dealing.begin(), dealing.end(), 0);
        rng.shuffle(std::span<int>(dealing));
    }

    std::vector<int> fold_of(static_cast<std::size_t>(n));
    for (std::size_t pos = 0; pos < dealing.size(); ++pos) {
        fold_of[static_cast<std::size_t>(dealing[pos])] = static_cast<int>(pos % static_cast<std::size_t>(k));
    }

    // Independent order for carving validation out of each training portion.
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<int>(order));

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.stratified = stratify_labels.has_value();
    plan.folds.resize(static_cast<std::size_t>(k));
    for (int f = 0; f < k; ++f) {
        FoldAssignment& fold = plan.folds[static_cast<std::size_t>(f)];
        std::vector<int> rest;
        for (const int i : order) {
            if (fold_of[static_cast<std::size_t>(i)] == f) {
                fold.test_indices.push_back(i);
            } else {
                rest.push_back(i);
            }
        }
        const auto n_val = static_cast<std::size_t>(std::lround(kValidationFraction * static_cast<double>(rest.size())));
        fold.train_indices.assign(rest.begin(), rest.end() - static_cast<std::ptrdiff_t>(n_val));
        fold.validation_indices.assign(rest.end() - static_cast<std::ptrdiff_t>(n_val), rest.end());
        std::sort(fold.test_indices.begin(), fold.test_indices.end());
        std::sort(fold.train_indices.begin(), fold.train_indices.end());
        std::sort(fold.validation_indices.begin(), fold.validation_indices.end());
    }
    return plan;
}

} // namespace fcmdnn
