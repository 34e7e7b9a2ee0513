#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace fcmdnn {

struct FoldAssignment {
    std::vector<int> test_indices;       // ascending
    std::vector<int> train_indices;      // ascending
    std::vector<int> validation_indices; // ascending
};

struct FoldPlan {
    int k = 0;
    std::uint64_t seed = 0;
    bool stratified = false;
    std::vector<FoldAssignment> folds;
};

inline constexpr double kValidationFraction = 0.2;

/// K-fold plan over indices [0, n). Indices are dealt round-robin from a
/// seeded permutation, so fold f receives floor(n/k) samples plus one when
/// f < n mod k. With stratify_labels each class is shuffled separately and
/// the classes are dealt back to back, keeping every fold within one sample
/// of the global class ratio. The validation set of a fold is the last
/// round(0.2 * m) of its m non-test indices in a second seeded order.
FoldPlan make_fold_plan(int n, int k, std::uint64_t seed,
                        const std::optional<std::vector<int>>& stratify_labels = std::nullopt);

} // namespace fcmdnn
