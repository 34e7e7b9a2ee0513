#include "fcmdnn/preprocess.hpp"

#include "fcmdnn/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fcmdnn {
namespace {

// Source coordinate of output pixel `i` under pixel-center alignment, clamped to the grid.
void source_coord(int i, int in_size, int out_size, int& lo, int& hi, double& frac) {
    double s = (i + 0.5) * static_cast<double>(in_size) / out_size - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(in_size - 1));
    lo = static_cast<int>(std::floor(s));
    hi = std::min(lo + 1, in_size - 1);
    frac = s - lo;
}

} // namespace

Sample resize(const Sample& sample, int target_side) {
    if (sample.width <= 0 || sample.height <= 0 || sample.pixels.empty()) {
        throw Error(ErrorKind::invalid_dimension, "cannot resize a zero-area image");
    }
    if (target_side < 1) throw Error(ErrorKind::invalid_dimension, "target side must be >= 1");

    Sample out = sample;
    out.width = target_side;
    out.height = target_side;
    out.pixels.assign(static_cast<std::size_t>(target_side) * static_cast<std::size_t>(target_side), 0.0);

    const auto at = [&](int x, int y) {
        return sample.pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(sample.width) +
                             static_cast<std::size_t>(x)];
    };
    for (int y = 0; y < target_side; ++y) {
        int y0, y1;
        double fy;
        source_coord(y, sample.height, target_side, y0, y1, fy);
        for (int x = 0; x < target_side; ++x) {
            int x0, x1;
            double fx;
            source_coord(x, sample.width, target_side, x0, x1, fx);
            // std::lerp is exact at the endpoints and for equal operands.
            const double top = std::lerp(at(x0, y0), at(x1, y0), fx);
            const double bottom = std::lerp(at(x0, y1), at(x1, y1), fx);
            out.pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(target_side) +
                       static_cast<std::size_t>(x)] = std::lerp(top, bottom, fy);
        }
    }
    return out;
}

Dataset resize_all(const Dataset& dataset, int target_side) {
    Dataset out = dataset;
    for (auto& s : out.samples) s = resize(s, target_side);
    return out;
}

void check_uniform_shape(const Dataset& dataset) {
    if (dataset.samples.empty()) return;
    const auto& first = dataset.samples.front();
    for (const auto& s : dataset.samples) {
        if (s.width != first.width || s.height != first.height || s.pixels.size() != first.pixels.size()) {
            throw Error(ErrorKind::shape_mismatch, "sample " + std::to_string(s.id) +
                                                       " has different dimensions; resize first");
        }
    }
}

MinMaxStats fit_minmax(const Dataset& dataset) {
    check_uniform_shape(dataset);
    MinMaxStats stats;
    if (dataset.samples.empty()) return stats;
    stats.min = dataset.samples.front().pixels;
    stats.max = dataset.samples.front().pixels;
    for (const auto& s : dataset.samples) {
        for (std::size_t j = 0; j < s.pixels.size(); ++j) {
            stats.min[j] = std::min(stats.min[j], s.pixels[j]);
            stats.max[j] = std::max(stats.max[j], s.pixels[j]);
        }
    }
    return stats;
}

Dataset apply_normalization(const Dataset& dataset, Normalization mode, const MinMaxStats* stats) {
    check_uniform_shape(dataset);
    Dataset out = dataset;
    if (mode == Normalization::scale_by_255) {
        for (auto& s : out.samples) {
            for (auto& v : s.pixels) v = std::clamp(v / 255.0, 0.0, 1.0);
        }
        return out;
    }
    if (stats == nullptr) throw Error(ErrorKind::configuration, "min-max normalization needs fitted statistics");
    for (auto& s : out.samples) {
        if (s.pixels.size() != stats->min.size()) {
            throw Error(ErrorKind::shape_mismatch, "normalization statistics do not match sample width");
        }
        for (std::size_t j = 0; j < s.pixels.size(); ++j) {
            const double range = stats->max[j] - stats->min[j];
            s.pixels[j] = range > 0.0 ? std::clamp((s.pixels[j] - stats->min[j]) / range, 0.0, 1.0) : 0.0;
        }
    }
    return out;
}

Dataset normalize(const Dataset& dataset, const PreprocessConfig& config) {
    if (config.normalization == Normalization::scale_by_255) {
        return apply_normalization(dataset, config.normalization);
    }
    const MinMaxStats stats = fit_minmax(dataset);
    return apply_normalization(dataset, config.normalization, &stats);
}

} // namespace fcmdnn
