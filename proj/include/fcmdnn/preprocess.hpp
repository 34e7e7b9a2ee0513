#pragma once

#include "fcmdnn/dataset.hpp"

#include <vector>

namespace fcmdnn {

enum class Normalization { scale_by_255, per_attribute_minmax };

struct PreprocessConfig {
    int target_side = 100;
    Normalization normalization = Normalization::scale_by_255;
};

/// Bilinear resize with pixel-center alignment to target_side x target_side.
Sample resize(const Sample& sample, int target_side);

Dataset resize_all(const Dataset& dataset, int target_side);

/// Per pixel-position range, fitted on one set of samples and applied to any.
struct MinMaxStats {
    std::vector<double> min;
    std::vector<double> max;
};

MinMaxStats fit_minmax(const Dataset& dataset);

/// Applies the configured normalization. In per_attribute_minmax mode `stats`
/// supplies the fitted ranges; values from data outside the fitted range are
/// clamped into [0, 1]. Constant attributes map to 0.
Dataset apply_normalization(const Dataset& dataset, Normalization mode, const MinMaxStats* stats = nullptr);

/// Normalizes a dataset using statistics of that same dataset.
Dataset normalize(const Dataset& dataset, const PreprocessConfig& config);

void check_uniform_shape(const Dataset& dataset);

} // namespace fcmdnn
