#pragma once

#include "fcmdnn/dataset.hpp"
#include "fcmdnn/fcm.hpp"
#include "fcmdnn/metrics.hpp"
#include "fcmdnn/network.hpp"
#include "fcmdnn/partition.hpp"
#include "fcmdnn/preprocess.hpp"

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace fcmdnn {

enum class ModelKind { nn, dnn, fcm_dnn };

std::string to_string(ModelKind kind);
ModelKind model_from_string(const std::string& name); // accepts "fcm-dnn" and "fcm_dnn"

/// Topology and training settings independent of input width and head size.
struct NetworkConfig {
    std::vector<int> hidden;
    Activation hidden_activation = Activation::maxout;
    int maxout_pieces = 2;
    double l1 = 0.0;
    double l2 = 0.0;
    OptimizerConfig optimizer;
    int epochs = 50;
    int batch_size = 1;
    bool shuffle = true;

    /// Sigmoid head when classes == 2 and !force_softmax, else softmax of width `classes`.
    NetworkSpec build(int input_width, int classes, bool force_softmax, std::uint64_t seed) const;
};

/// Two hidden sigmoid layers of 50, momentum 0.2, 20 training cycles.
NetworkConfig nn_defaults();
/// Six maxout layers 50-40-30-20-15-10, adaptive rate (rho 0.99, eps 1e-8), L1 1e-5, 50 epochs.
NetworkConfig dnn_defaults();
/// 50 iterations, fuzzifier 2.0, min gain 1e-4.
FcmConfig fcm_defaults();

struct ExperimentConfig {
    ModelKind model = ModelKind::dnn;
    int k = 10;
    PreprocessConfig preprocess;
    FcmConfig fcm = fcm_defaults();
    NetworkConfig network = dnn_defaults();
    int clusters_per_class = 5;
    std::uint64_t master_seed = 0;
    bool stratify = true;
    /// Normalize and cluster the whole dataset before splitting.
    bool paper_order = false;
    /// FCM over both classes at once instead of per class.
    bool joint_clustering = false;
    int jobs = 1;

    /// Defaults for a model kind, with the matching network settings.
    static ExperimentConfig defaults_for(ModelKind model);
    void validate() const;
    bool paper_fold_count() const { return k == 5 || k == 7 || k == 10; }
};

/// Records every sample id that reaches a fitting path, per fold.
class LeakageAudit {
public:
    void record(int fold, const std::string& path, const std::vector<int>& ids);
    void record_test(int fold, const std::vector<int>& ids);

    struct Violation {
        int fold;
        std::string path;
        int id;
    };
    std::vector<Violation> violations() const;
    std::set<std::string> paths(int fold) const;
    std::size_t fitted_count(int fold, const std::string& path) const;

private:
    mutable std::mutex mutex_;
    std::map<int, std::map<std::string, std::set<int>>> fitted_;
    std::map<int, std::set<int>> test_;
};

/// Everything needed to re-run a fold's predictions without the training data.
struct FoldModel {
    int fold = 0;
    ModelKind model = ModelKind::dnn;
    PreprocessConfig preprocess;
    std::optional<MinMaxStats> minmax;
    int clusters_per_class = 0; // fcm_dnn only
    NetworkSpec spec;
    NetworkParams params;
    std::vector<int> test_ids;
};

struct FoldOutcome {
    int fold = 0;
    int train_count = 0;
    int validation_count = 0;
    std::vector<int> test_ids;
    std::vector<int> predicted;
    FoldEvaluation evaluation;
    std::vector<EpochLoss> history;
    std::optional<double> cluster_accuracy; // fcm_dnn: 2c-way accuracy on test
    std::vector<int> predicted_clusters;
    std::vector<int> true_clusters;
    std::vector<RocPoint> roc;
};

struct RunReport {
    ExperimentConfig config;
    int n = 0;
    std::vector<FoldOutcome> folds;
    MetricsReport pooled;
    MetricsReport mean;
    std::optional<double> pooled_cluster_accuracy;
    std::vector<std::pair<std::string, std::uint64_t>> seed_ledger;
    double duration_seconds = 0.0;
    std::vector<FoldModel> models;
    FoldPlan plan;
};

/// Resizes and (for scale_by_255) normalizes every sample; used by the
/// per-fold pipeline and by frozen-model evaluation.
Dataset prepare_features(const Dataset& dataset, const PreprocessConfig& config, const MinMaxStats* stats);

/// Runs the configured model over a K-fold plan. `audit`, when given,
/// receives every id fed to a fitting path.
RunReport run_experiment(const Dataset& dataset, const ExperimentConfig& config, LeakageAudit* audit = nullptr);

RunReport run_nn(const Dataset& dataset, ExperimentConfig config, LeakageAudit* audit = nullptr);
RunReport run_dnn(const Dataset& dataset, ExperimentConfig config, LeakageAudit* audit = nullptr);
RunReport run_fcm_dnn(const Dataset& dataset, ExperimentConfig config, LeakageAudit* audit = nullptr);

/// Binary class of a cluster under the offset construction.
constexpr int cluster_to_class(int cluster, int clusters_per_class) noexcept {
    return cluster < clusters_per_class ? 0 : 1;
}

struct ModelPrediction {
    std::vector<int> predicted;
    std::vector<double> sick_scores;
    std::vector<int> predicted_clusters; // fcm_dnn only
};

/// Predictions on samples already passed through the model's preprocessing.
ModelPrediction predict_features(const FoldModel& model, const Dataset& features);

/// Predictions of a frozen fold model on raw (unprocessed) samples.
ModelPrediction predict_with_model(const FoldModel& model, const Dataset& raw);

} // namespace fcmdnn
