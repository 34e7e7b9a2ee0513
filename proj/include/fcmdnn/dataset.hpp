#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace fcmdnn {

enum class ClassLabel : int { healthy = 0, sick = 1 };

struct Sample {
    int id = 0;
    std::vector<double> pixels; // row-major, width * height entries
    int width = 0;
    int height = 0;
    int class_label = 0; // 0 healthy, 1 sick
    std::optional<int> cluster_label;
};

enum class Provenance { loaded, synthetic };

struct Dataset {
    std::vector<Sample> samples;
    std::optional<int> num_clusters;
    Provenance provenance = Provenance::loaded;
    std::optional<std::uint64_t> generator_seed;

    std::size_t size() const noexcept { return samples.size(); }

    /// Throws shape_mismatch / domain on any broken invariant.
    void validate() const;

    std::vector<int> class_labels() const;

    /// n x d feature matrix; all samples must share dimensions.
    Eigen::MatrixXd feature_matrix() const;

    /// Subset in the given order; ids are kept (not renumbered).
    Dataset subset(const std::vector<int>& indices) const;

    std::size_t count_class(int label) const;
};

/// Loads `root/healthy` and `root/sick` (PGM or PNG, 8-bit grayscale). Files
/// are taken in lexicographic filename order, healthy first, ids dense.
Dataset load_dataset(const std::filesystem::path& root);

/// Writes every sample as an 8-bit P5 PGM in the loadable layout. Pixels are
/// rounded and clamped to [0, 255]; synthetic data is already integral.
void write_dataset(const Dataset& dataset, const std::filesystem::path& root);

inline constexpr int kSyntheticRecipeVersion = 1;
inline constexpr int kSyntheticSubpatterns = 5;

struct SyntheticDataset {
    Dataset dataset;
    /// Generative sub-pattern of each sample, in [0, kSyntheticSubpatterns).
    std::vector<int> subpattern;
};

/// Seeded stand-in for a real image cohort: each class places an elevated
/// intensity ellipse (class-specific radius and brightness, one of five
/// sub-pattern positions) on a noisy background. Pure in its arguments.
SyntheticDataset gen_synthetic_detailed(int n_healthy, int n_sick, int side, std::uint64_t seed);

Dataset gen_synthetic(int n_healthy, int n_sick, int side, std::uint64_t seed);

} // namespace fcmdnn
