#include "fcmdnn/pipeline.hpp"

#include "fcmdnn/error.hpp"
#include "fcmdnn/random.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <thread>

namespace fcmdnn {

std::string to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::nn: return "nn";
    case ModelKind::dnn: return "dnn";
    case ModelKind::fcm_dnn: return "fcm-dnn";
    }
    return "unknown";
}

ModelKind model_from_string(const std::string& name) {
    if (name == "nn") return ModelKind::nn;
    if (name == "dnn") return ModelKind::dnn;
    if (name == "fcm-dnn" || name == "fcm_dnn") return ModelKind::fcm_dnn;
    throw Error(ErrorKind::usage, "unknown model '" + name + "' (expected nn, dnn or fcm-dnn)");
}

NetworkSpec NetworkConfig::build(int input_width, int classes, bool force_softmax, std::uint64_t seed) const {
    NetworkSpec spec;
    int width = input_width;
    for (const int h : hidden) {
        spec.layers.push_back({width, h, hidden_activation, maxout_pieces});
        width = h;
    }
    if (classes == 2 && !force_softmax) {
        spec.layers.push_back({width, 1, Activation::sigmoid, 2});
    } else {
        spec.layers.push_back({width, classes, Activation::softmax, 2});
    }
    spec.l1 = l1;
    spec.l2 = l2;
    spec.optimizer = optimizer;
    spec.epochs = epochs;
    spec.batch_size = batch_size;
    spec.shuffle = shuffle;
    spec.seed = seed;
    spec.validate();
    return spec;
}

NetworkConfig nn_defaults() {
    NetworkConfig c;
    c.hidden = {50, 50};
    c.hidden_activation = Activation::sigmoid;
    c.optimizer = OptimizerConfig::momentum_sgd(0.01, 0.2);
    c.epochs = 20;
    c.batch_size = 1;
    return c;
}

NetworkConfig dnn_defaults() {
    NetworkConfig c;
    c.hidden = {50, 40, 30, 20, 15, 10};
    c.hidden_activation = Activation::maxout;
    c.maxout_pieces = 2;
    c.optimizer = OptimizerConfig::adaptive(0.99, 1.0e-8);
    c.l1 = 1.0e-5;
    c.l2 = 0.0;
    c.epochs = 50;
    c.batch_size = 1;
    return c;
}

FcmConfig fcm_defaults() {
    FcmConfig c;
    c.fuzzifier = 2.0;
    c.max_iterations = 50;
    c.min_gain = 1.0e-4;
    return c;
}

ExperimentConfig ExperimentConfig::defaults_for(ModelKind model) {
    ExperimentConfig c;
    c.model = model;
    c.network = model == ModelKind::nn ? nn_defaults() : dnn_defaults();
    return c;
}

void ExperimentConfig::validate() const {
    if (k < 2) throw Error(ErrorKind::invalid_fold_count, "k must be >= 2");
    if (preprocess.target_side < 1) throw Error(ErrorKind::configuration, "target side must be >= 1");
    if (clusters_per_class < 1) throw Error(ErrorKind::configuration, "clusters_per_class must be >= 1");
    if (jobs < 1) throw Error(ErrorKind::configuration, "jobs must be >= 1");
    if (network.hidden.empty()) throw Error(ErrorKind::configuration, "network needs at least one hidden layer");
    network.optimizer.validate();
    FcmConfig probe = fcm;
    probe.num_clusters = std::max(2, clusters_per_class);
    probe.validate();
}

void LeakageAudit::record(int fold, const std::string& path, const std::vector<int>& ids) {
    std::lock_guard lock(mutex_);
    fitted_[fold][path].insert(ids.begin(), ids.end());
}

void LeakageAudit::record_test(int fold, const std::vector<int>& ids) {
    std::lock_guard lock(mutex_);
    test_[fold].insert(ids.begin(), ids.end());
}

std::vector<LeakageAudit::Violation> LeakageAudit::violations() const {
    std::lock_guard lock(mutex_);
    std::vector<Violation> out;
    for (const auto& [fold, tests] : test_) {
        const auto it = fitted_.find(fold);
        if (it == fitted_.end()) continue;
        for (const auto& [path, ids] : it->second) {
            for (const int id : ids) {
                if (tests.count(id)) out.push_back({fold, path, id});
            }
        }
    }
    return out;
}

std::set<std::string> LeakageAudit::paths(int fold) const {
    std::lock_guard lock(mutex_);
    std::set<std::string> out;
    if (const auto it = fitted_.find(fold); it != fitted_.end()) {
        for (const auto& [path, ids] : it->second) out.insert(path);
    }
    return out;
}

std::size_t LeakageAudit::fitted_count(int fold, const std::string& path) const {
    std::lock_guard lock(mutex_);
    const auto it = fitted_.find(fold);
    if (it == fitted_.end()) return 0;
    const auto jt = it->second.find(path);
    return jt == it->second.end() ? 0 : jt->second.size();
}

Dataset prepare_features(const Dataset& dataset, const PreprocessConfig& config, const MinMaxStats* stats) {
    return apply_normalization(resize_all(dataset, config.target_side), config.normalization, stats);
}

namespace {

constexpr std::uint64_t kWholeDatasetIndex = 0xFFFFFFFFULL;

std::vector<int> ids_of(const Dataset& d) {
    std::vector<int> ids;
    ids.reserve(d.size());
    for (const auto& s : d.samples) ids.push_back(s.id);
    return ids;
}

std::vector<int> concat(std::vector<int> a, const std::vector<int>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    return a;
}

struct SharedInputs {
    const ExperimentConfig& config;
    const Dataset& resized;                         // resized, not normalized
    std::optional<MinMaxStats> global_stats;        // whole-dataset order, min-max mode
    std::optional<PerClassClustering> global_clusters; // whole-dataset order, fcm_dnn
    const FoldPlan& plan;
    LeakageAudit* audit;
    int fold_count;
};

LabeledData labeled(const Dataset& d, const std::vector<int>& labels) {
    return {d.feature_matrix(), labels};
}

std::pair<FoldOutcome, FoldModel> run_fold(const SharedInputs& in, int f) {
    const ExperimentConfig& cfg = in.config;
    const FoldAssignment& assignment = in.plan.folds[static_cast<std::size_t>(f)];
    const std::uint64_t net_seed = derive_seed(cfg.master_seed, SeedStream::network, static_cast<std::uint64_t>(f));
    const std::uint64_t fcm_seed = derive_seed(cfg.master_seed, SeedStream::fcm, static_cast<std::uint64_t>(f));

    const Dataset raw_train = in.resized.subset(assignment.train_indices);
    const Dataset raw_val = in.resized.subset(assignment.validation_indices);
    const Dataset raw_test = in.resized.subset(assignment.test_indices);
    const std::vector<int> fit_indices = concat(assignment.train_indices, assignment.validation_indices);
    if (in.audit) in.audit->record_test(f, ids_of(raw_test));

    FoldModel model;
    model.fold = f;
    model.model = cfg.model;
    model.preprocess = cfg.preprocess;
    model.test_ids = ids_of(raw_test);

    if (cfg.preprocess.normalization == Normalization::per_attribute_minmax) {
        if (in.global_stats) {
            model.minmax = in.global_stats;
            if (in.audit) in.audit->record(f, "normalization", ids_of(in.resized));
        } else {
            const Dataset fit_set = in.resized.subset(fit_indices);
            model.minmax = fit_minmax(fit_set);
            if (in.audit) in.audit->record(f, "normalization", ids_of(fit_set));
        }
    }
    const MinMaxStats* stats = model.minmax ? &*model.minmax : nullptr;
    const Dataset train = apply_normalization(raw_train, cfg.preprocess.normalization, stats);
    const Dataset val = apply_normalization(raw_val, cfg.preprocess.normalization, stats);
    const Dataset test = apply_normalization(raw_test, cfg.preprocess.normalization, stats);
    const int width = static_cast<int>(train.samples.front().pixels.size());

    FoldOutcome out;
    out.fold = f;
    out.train_count = static_cast<int>(train.size());
    out.validation_count = static_cast<int>(val.size());
    out.test_ids = model.test_ids;
    const std::vector<int> actual = test.class_labels();

    if (cfg.model == ModelKind::fcm_dnn) {
        const int cpc = cfg.clusters_per_class;
        std::vector<int> train_clusters;
        std::vector<int> val_clusters;
        if (in.global_clusters) {
            const auto& labelled = in.global_clusters->dataset.samples;
            for (const int i : assignment.train_indices) train_clusters.push_back(*labelled[static_cast<std::size_t>(i)].cluster_label);
            for (const int i : assignment.validation_indices) val_clusters.push_back(*labelled[static_cast<std::size_t>(i)].cluster_label);
            for (const int i : assignment.test_indices) out.true_clusters.push_back(*labelled[static_cast<std::size_t>(i)].cluster_label);
            if (in.audit) in.audit->record(f, "fcm", ids_of(in.resized));
        } else {
            // Class labels only pick the subset each clustering runs on.
            Dataset fit_set = train;
            fit_set.samples.insert(fit_set.samples.end(), val.samples.begin(), val.samples.end());
            FcmConfig fcm = cfg.fcm;
            fcm.seed = fcm_seed;
            const PerClassClustering clusters = cfg.joint_clustering
                                                    ? cluster_dataset_joint(fit_set, cpc, fcm)
                                                    : cluster_dataset_per_class(fit_set, cpc, fcm);
            if (in.audit) in.audit->record(f, "fcm", ids_of(fit_set));
            for (std::size_t i = 0; i < train.size(); ++i) train_clusters.push_back(*clusters.dataset.samples[i].cluster_label);
            for (std::size_t i = 0; i < val.size(); ++i) val_clusters.push_back(*clusters.dataset.samples[train.size() + i].cluster_label);
            for (const auto& s : test.samples) out.true_clusters.push_back(assign_cluster(clusters, s));
        }

        model.clusters_per_class = cpc;
        model.spec = cfg.network.build(width, 2 * cpc, true, net_seed);
        if (in.audit) in.audit->record(f, "network", ids_of(train));
        TrainResult trained = fcmdnn::train(model.spec, labeled(train, train_clusters), labeled(val, val_clusters));
        model.params = std::move(trained.params);
        out.history = std::move(trained.history);
    } else {
        model.spec = cfg.network.build(width, 2, false, net_seed);
        if (in.audit) in.audit->record(f, "network", ids_of(train));
        TrainResult trained = fcmdnn::train(model.spec, labeled(train, train.class_labels()), labeled(val, val.class_labels()));
        model.params = std::move(trained.params);
        out.history = std::move(trained.history);
    }

    const ModelPrediction pred = predict_features(model, test);
    out.predicted = pred.predicted;
    out.evaluation = evaluate_fold(pred.predicted, pred.sick_scores, actual);
    if (cfg.model == ModelKind::fcm_dnn) {
        out.predicted_clusters = pred.predicted_clusters;
        long hits = 0;
        for (std::size_t i = 0; i < out.true_clusters.size(); ++i) {
            hits += out.predicted_clusters[i] == out.true_clusters[i] ? 1 : 0;
        }
        out.cluster_accuracy = static_cast<double>(hits) / static_cast<double>(out.true_clusters.size());
    }
    if (out.evaluation.report.auc) out.roc = roc_auc(pred.sick_scores, actual).curve;
    return {std::move(out), std::move(model)};
}

} // namespace

ModelPrediction predict_features(const FoldModel& model, const Dataset& features) {
    ModelPrediction out;
    const auto preds = predict_batch(model.spec, model.params, features.feature_matrix());
    for (const auto& p : preds) {
        if (model.model == ModelKind::fcm_dnn) {
            const int cpc = model.clusters_per_class;
            out.predicted_clusters.push_back(p.label);
            out.predicted.push_back(cluster_to_class(p.label, cpc));
            // Sick score: softmax mass on the sick clusters.
            out.sick_scores.push_back(p.score.tail(p.score.size() - cpc).sum());
        } else {
            out.predicted.push_back(p.label);
            out.sick_scores.push_back(p.score(0));
        }
    }
    return out;
}

ModelPrediction predict_with_model(const FoldModel& model, const Dataset& raw) {
    if (raw.size() == 0) throw Error(ErrorKind::insufficient_data, "no samples to evaluate");
    const MinMaxStats* stats = model.minmax ? &*model.minmax : nullptr;
    return predict_features(model, prepare_features(raw, model.preprocess, stats));
}

RunReport run_experiment(const Dataset& dataset, const ExperimentConfig& config, LeakageAudit* audit) {
    const auto started = std::chrono::steady_clock::now();
    config.validate();
    dataset.validate();
    const int n = static_cast<int>(dataset.size());
    if (config.model == ModelKind::fcm_dnn) {
        for (int label = 0; label < 2; ++label) {
            const auto count = dataset.count_class(label);
            if (count < static_cast<std::size_t>(config.clusters_per_class)) {
                throw Error(ErrorKind::insufficient_data,
                            std::string(label == 0 ? "healthy" : "sick") + " class has " + std::to_string(count) +
                                " samples, fewer than clusters_per_class=" +
                                std::to_string(config.clusters_per_class));
            }
        }
    }

    RunReport report;
    report.config = config;
    report.n = n;
    report.seed_ledger.emplace_back("master", config.master_seed);

    const Dataset resized = resize_all(dataset, config.preprocess.target_side);
    const std::uint64_t partition_seed = derive_seed(config.master_seed, SeedStream::partition);
    report.seed_ledger.emplace_back("partition", partition_seed);
    report.plan = make_fold_plan(n, config.k, partition_seed,
                                 config.stratify ? std::optional(resized.class_labels()) : std::nullopt);

    SharedInputs in{config, resized, std::nullopt, std::nullopt, report.plan, audit, config.k};
    if (config.paper_order) {
        if (config.preprocess.normalization == Normalization::per_attribute_minmax) {
            in.global_stats = fit_minmax(resized);
        }
        if (config.model == ModelKind::fcm_dnn) {
            const MinMaxStats* stats = in.global_stats ? &*in.global_stats : nullptr;
            const Dataset normalized = apply_normalization(resized, config.preprocess.normalization, stats);
            FcmConfig fcm = config.fcm;
            fcm.seed = derive_seed(config.master_seed, SeedStream::fcm, kWholeDatasetIndex);
            report.seed_ledger.emplace_back("fcm[all]", fcm.seed);
            in.global_clusters = config.joint_clustering
                                     ? cluster_dataset_joint(normalized, config.clusters_per_class, fcm)
                                     : cluster_dataset_per_class(normalized, config.clusters_per_class, fcm);
        }
    }
    for (int f = 0; f < config.k; ++f) {
        report.seed_ledger.emplace_back("network[" + std::to_string(f) + "]",
                                        derive_seed(config.master_seed, SeedStream::network, static_cast<std::uint64_t>(f)));
        if (config.model == ModelKind::fcm_dnn && !config.paper_order) {
            report.seed_ledger.emplace_back("fcm[" + std::to_string(f) + "]",
                                            derive_seed(config.master_seed, SeedStream::fcm, static_cast<std::uint64_t>(f)));
        }
    }

    std::vector<std::optional<std::pair<FoldOutcome, FoldModel>>> results(static_cast<std::size_t>(config.k));
    if (config.jobs <= 1) {
        for (int f = 0; f < config.k; ++f) results[static_cast<std::size_t>(f)] = run_fold(in, f);
    } else {
        std::atomic<int> next{0};
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(config.k));
        std::vector<std::thread> workers;
        const int threads = std::min(config.jobs, config.k);
        for (int t = 0; t < threads; ++t) {
            workers.emplace_back([&] {
                for (int f = next++; f < config.k; f = next++) {
                    try {
                        results[static_cast<std::size_t>(f)] = run_fold(in, f);
                    } catch (...) {
                        errors[static_cast<std::size_t>(f)] = std::current_exception();
                    }
                }
            });
        }
        for (auto& w : workers) w.join();
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    std::vector<FoldEvaluation> evaluations;
    long cluster_hits = 0;
    long cluster_total = 0;
    for (auto& r : results) {
        evaluations.push_back(r->first.evaluation);
        if (r->first.cluster_accuracy) {
            for (std::size_t i = 0; i < r->first.true_clusters.size(); ++i) {
                cluster_hits += r->first.predicted_clusters[i] == r->first.true_clusters[i] ? 1 : 0;
            }
            cluster_total += static_cast<long>(r->first.true_clusters.size());
        }
        report.folds.push_back(std::move(r->first));
        report.models.push_back(std::move(r->second));
    }
    const Aggregate agg = aggregate(evaluations);
    report.pooled = agg.pooled;
    report.mean = agg.mean;
    if (cluster_total > 0) {
        report.pooled_cluster_accuracy = static_cast<double>(cluster_hits) / static_cast<double>(cluster_total);
    }
    report.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

RunReport run_nn(const Dataset& dataset, ExperimentConfig config, LeakageAudit* audit) {
    config.model = ModelKind::nn;
    return run_experiment(dataset, config, audit);
}

RunReport run_dnn(const Dataset& dataset, ExperimentConfig config, LeakageAudit* audit) {
    config.model = ModelKind::dnn;
    return run_experiment(dataset, config, audit);
}

RunReport run_fcm_dnn(const Dataset& dataset, ExperimentConfig config, LeakageAudit* audit) {
    config.model = ModelKind::fcm_dnn;
    return run_experiment(dataset, config, audit);
}

} // namespace fcmdnn
