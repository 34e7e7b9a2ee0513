#include "fcmdnn/dataset.hpp"

#include "fcmdnn/error.hpp"
#include "fcmdnn/image_io.hpp"
#include "fcmdnn/random.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>
#include <string>

namespace fcmdnn {

void Dataset::validate() const {
    bool any_cluster = false;
    bool all_cluster = true;
    std::vector<bool> seen(samples.size(), false);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Sample& s = samples[i];
        if (s.id < 0 || static_cast<std::size_t>(s.id) >= samples.size() || seen[static_cast<std::size_t>(s.id)]) {
            throw Error(ErrorKind::domain, "sample ids must be unique and dense in [0, n)");
        }
        seen[static_cast<std::size_t>(s.id)] = true;
        if (s.width <= 0 || s.height <= 0 ||
            s.pixels.size() != static_cast<std::size_t>(s.width) * static_cast<std::size_t>(s.height)) {
            throw Error(ErrorKind::shape_mismatch,
                        "sample " + std::to_string(s.id) + " pixel count does not match width x height");
        }
        if (s.class_label != 0 && s.class_label != 1) {
            throw Error(ErrorKind::domain, "sample " + std::to_string(s.id) + " has non-binary class label");
        }
        if (s.cluster_label) {
            any_cluster = true;
            if (!num_clusters || *s.cluster_label < 0 || *s.cluster_label >= *num_clusters) {
                throw Error(ErrorKind::domain, "sample " + std::to_string(s.id) + " cluster label out of range");
            }
        } else {
            all_cluster = false;
        }
    }
    if (any_cluster && !all_cluster) {
        throw Error(ErrorKind::domain, "cluster labels must be present on all samples or none");
    }
}

std::vector<int> Dataset::class_labels() const {
    std::vector<int> labels;
    labels.reserve(samples.size());
    for (const auto& s : samples) labels.push_back(s.class_label);
    return labels;
}

Eigen::MatrixXd Dataset::feature_matrix() const {
    if (samples.empty()) return {};
    const auto d = samples.front().pixels.size();
    Eigen::MatrixXd x(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].pixels.size() != d) {
            throw Error(ErrorKind::shape_mismatch, "samples have differing dimensions");
        }
        for (std::size_t j = 0; j < d; ++j) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = samples[i].pixels[j];
        }
    }
    return x;
}

Dataset Dataset::subset(const std::vector<int>& indices) const {
    Dataset out;
    out.num_clusters = num_clusters;
    out.provenance = provenance;
    out.generator_seed = generator_seed;
    out.samples.reserve(indices.size());
    for (const int i : indices) out.samples.push_back(samples.at(static_cast<std::size_t>(i)));
    return out;
}

std::size_t Dataset::count_class(int label) const {
    return static_cast<std::size_t>(
        std::count_if(samples.begin(), samples.end(), [&](const Sample& s) { return s.class_label == label; }));
}

namespace {

bool is_image_file(const std::filesystem::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".pgm" || ext == ".png";
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
    return files;
}

constexpr const char* kClassDirs[2] = {"healthy", "sick"};

} // namespace

Dataset load_dataset(const std::filesystem::path& root) {
    if (!std::filesystem::is_directory(root)) {
        throw Error(ErrorKind::configuration, "dataset directory not found: " + root.string());
    }
    Dataset data;
    data.provenance = Provenance::loaded;
    for (int label = 0; label < 2; ++label) {
        const auto dir = root / kClassDirs[label];
        if (!std::filesystem::is_directory(dir)) {
            throw Error(ErrorKind::empty_class, "missing class directory " + dir.string());
        }
        const auto files = list_images(dir);
        if (files.empty()) {
            throw Error(ErrorKind::empty_class, "no images in " + dir.string());
        }
        for (const auto& file : files) {
            GrayImage img = read_image(file);
            Sample s;
            s.id = static_cast<int>(data.samples.size());
            s.width = img.width;
            s.height = img.height;
            s.class_label = label;
            s.pixels.assign(img.pixels.begin(), img.pixels.end());
            data.samples.push_back(std::move(s));
        }
    }
    return data;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& root) {
    std::error_code ec;
    for (const char* name : kClassDirs) {
        std::filesystem::create_directories(root / name, ec);
        if (ec) throw Error(ErrorKind::io, "cannot create " + (root / name).string() + ": " + ec.message());
    }
    for (const auto& s : dataset.samples) {
        GrayImage img;
        img.width = s.width;
        img.height = s.height;
        img.pixels.reserve(s.pixels.size());
        for (const double v : s.pixels) {
            img.pixels.push_back(static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)));
        }
        char name[32];
        std::snprintf(name, sizeof name, "%06d.pgm", s.id);
        write_pgm(root / kClassDirs[s.class_label == 0 ? 0 : 1] / name, img);
    }
}

namespace {

struct ClassRecipe {
    double radius_x;
    double radius_y;
    double brightness;
    double phase;
};

// Healthy: wide bright ellipse. Sick: narrower, dimmer, rotated sub-pattern ring.
constexpr ClassRecipe kRecipes[2] = {
    {0.20, 0.15, 175.0, 0.0},
    {0.14, 0.11, 125.0, std::numbers::pi / 5.0},
};

constexpr double kBackground = 45.0;
constexpr double kPixelNoise = 12.0;
constexpr double kRingRadius = 0.22;
constexpr double kCenterJitter = 0.025;
constexpr double kBrightnessJitter = 12.0;

} // namespace

SyntheticDataset gen_synthetic_detailed(int n_healthy, int n_sick, int side, std::uint64_t seed) {
    if (side < 4) throw Error(ErrorKind::invalid_dimension, "synthetic side must be >= 4");
    if (n_healthy < 1 || n_sick < 1) throw Error(ErrorKind::empty_class, "both classes need >= 1 sample");

    SyntheticDataset out;
    out.dataset.provenance = Provenance::synthetic;
    out.dataset.generator_seed = seed;
    const int counts[2] = {n_healthy, n_sick};
    const auto side_sz = static_cast<std::size_t>(side);

    for (int label = 0; label < 2; ++label) {
        const ClassRecipe& r = kRecipes[label];
        for (int j = 0; j < counts[label]; ++j) {
            const int id = static_cast<int>(out.dataset.samples.size());
            Rng rng(derive_seed(seed, SeedStream::synthetic, static_cast<std::uint64_t>(id)));
            const int pattern = j % kSyntheticSubpatterns;
            const double angle = r.phase + 2.0 * std::numbers::pi * pattern / kSyntheticSubpatterns;
            const double cx = 0.5 + kRingRadius * std::cos(angle) + kCenterJitter * rng.normal();
            const double cy = 0.5 + kRingRadius * std::sin(angle) + kCenterJitter * rng.normal();
            const double bright = r.brightness + kBrightnessJitter * rng.normal();

            Sample s;
            s.id = id;
            s.width = side;
            s.height = side;
            s.class_label = label;
            s.pixels.resize(side_sz * side_sz);
            for (int y = 0; y < side; ++y) {
                for (int x = 0; x < side; ++x) {
                    const double u = (x + 0.5) / side;
                    const double v = (y + 0.5) / side;
                    const double ex = (u - cx) / r.radius_x;
                    const double ey = (v - cy) / r.radius_y;
                    const bool inside = ex * ex + ey * ey <= 1.0;
                    const double value = (inside ? bright : kBackground) + kPixelNoise * rng.normal();
                    s.pixels[static_cast<std::size_t>(y) * side_sz + static_cast<std::size_t>(x)] =
                        std::clamp(std::round(value), 0.0, 255.0);
                }
            }
            out.dataset.samples.push_back(std::move(s));
            out.subpattern.push_back(pattern);
        }
    }
    return out;
}

Dataset gen_synthetic(int n_healthy, int n_sick, int side, std::uint64_t seed) {
    return gen_synthetic_detailed(n_healthy, n_sick, side, seed).dataset;
}

} // namespace fcmdnn
