#include "fcmdnn/cli.hpp"

#include "fcmdnn/error.hpp"
#include "fcmdnn/pipeline.hpp"
#include "fcmdnn/serialize.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>

namespace fcmdnn {

namespace fs = std::filesystem;

namespace {

std::string fold_name(int fold) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fold_%02d", fold);
    return buf;
}

std::string model_label(const std::string& model) {
    if (model == "nn") return "NN";
    if (model == "dnn") return "DNN";
    return "FCM-DNN";
}

std::string results_header() { return "Models,Number of Folds," + csv_header(); }

std::string results_row(const std::string& model, int k, const MetricsReport& r) {
    return model_label(model) + "," + std::to_string(k) + "-FCV," + csv_row(r);
}

void make_dirs(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
}

std::optional<std::uint64_t> env_seed() {
    const char* text = std::getenv("FCMDNN_SEED");
    if (!text || !*text) return std::nullopt;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(text, &end, 10);
    if (*end != '\0') throw Error(ErrorKind::usage, std::string("FCMDNN_SEED is not an unsigned integer: ") + text);
    return v;
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::usage:
    case ErrorKind::configuration:
    case ErrorKind::invalid_fold_count: return kExitUsage;
    default: return kExitRuntime;
    }
}

struct SynthArgs {
    int healthy = 0;
    int sick = 0;
    int side = 16;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
    if (a.healthy < 1 || a.sick < 1) throw Error(ErrorKind::usage, "--healthy and --sick must be >= 1");
    if (a.side < 4) throw Error(ErrorKind::usage, "--side must be >= 4");
    const SyntheticDataset synth = gen_synthetic_detailed(a.healthy, a.sick, a.side, a.seed);
    make_dirs(a.out);
    write_dataset(synth.dataset, a.out);
    const json manifest = {{"healthy", a.healthy},
                           {"sick", a.sick},
                           {"side", a.side},
                           {"seed", a.seed},
                           {"recipe_version", kSyntheticRecipeVersion},
                           {"subpattern", synth.subpattern}};
    write_text_file(fs::path(a.out) / "manifest.json", manifest.dump(2) + "\n");
    out << "wrote " << synth.dataset.size() << " images to " << a.out << "\n";
    return kExitOk;
}

struct PreprocessArgs {
    std::string data;
    std::string out;
    int side = 100;
};

int cmd_preprocess(const PreprocessArgs& a, std::ostream& out) {
    if (a.side < 1) throw Error(ErrorKind::usage, "--side must be >= 1");
    const Dataset resized = resize_all(load_dataset(a.data), a.side);
    make_dirs(a.out);
    write_dataset(resized, a.out);
    const json manifest = {{"source", a.data},
                           {"side", a.side},
                           {"healthy", resized.count_class(0)},
                           {"sick", resized.count_class(1)}};
    write_text_file(fs::path(a.out) / "manifest.json", manifest.dump(2) + "\n");
    out << "resized " << resized.size() << " images to " << a.side << "x" << a.side << " in " << a.out << "\n";
    return kExitOk;
}

struct TrainArgs {
    std::string model;
    std::string data;
    int folds = 10;
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    int jobs = 1;
    bool paper_order = false;
    bool joint = false;
    std::optional<int> side;
    std::optional<int> clusters_per_class;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
    const ModelKind kind = model_from_string(a.model);
    ExperimentConfig cfg = ExperimentConfig::defaults_for(kind);
    cfg.k = a.folds;
    std::optional<std::uint64_t> seed = a.seed;
    if (!a.config.empty()) {
        const json overlay = read_json_file(a.config);
        if (overlay.is_object() && overlay.contains("model") &&
            model_from_string(overlay.at("model").get<std::string>()) != kind) {
            throw Error(ErrorKind::usage, "config model differs from --model");
        }
        if (overlay.is_object() && overlay.contains("seed") && !seed) seed = overlay.at("seed").get<std::uint64_t>();
        apply_config_overlay(cfg, overlay);
        cfg.k = a.folds;
    }
    if (!seed) seed = env_seed();
    cfg.master_seed = seed.value_or(0);
    cfg.jobs = a.jobs;
    if (a.paper_order) cfg.paper_order = true;
    if (a.joint) cfg.joint_clustering = true;
    if (a.side) cfg.preprocess.target_side = *a.side;
    if (a.clusters_per_class) cfg.clusters_per_class = *a.clusters_per_class;
    cfg.validate();
    if (!cfg.paper_fold_count()) err << "warning: non-paper fold count " << cfg.k << "\n";

    const Dataset data = load_dataset(a.data);
    const RunReport report = run_experiment(data, cfg);

    const fs::path root(a.out);
    make_dirs(root / "roc");
    make_dirs(root / "models");
    write_text_file(root / "report.json", to_json(report).dump(2) + "\n");
    write_text_file(root / "plan.json", to_json(report.plan).dump(2) + "\n");
    const std::string model = to_string(kind);
    write_text_file(root / "results.csv", results_header() + "\n" + results_row(model, cfg.k, report.pooled) + "\n");
    for (std::size_t f = 0; f < report.folds.size(); ++f) {
        const int fold = report.folds[f].fold;
        write_text_file(root / "roc" / (fold_name(fold) + ".csv"), roc_csv(report.folds[f].roc));
        write_text_file(root / "models" / (fold_name(fold) + ".json"), to_json(report.models[f]).dump() + "\n");
    }
    out << results_header() << "\n" << results_row(model, cfg.k, report.pooled) << "\n";
    return kExitOk;
}

struct EvaluateArgs {
    std::string model_dir;
    std::string data;
    std::optional<int> fold;
    bool all = false;
    std::string out;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
    fs::path dir(a.model_dir);
    if (fs::is_directory(dir / "models")) dir /= "models";
    if (!fs::is_directory(dir)) throw Error(ErrorKind::configuration, "model directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (name.rfind("fold_", 0) == 0 && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(ErrorKind::io, "no fold models in " + dir.string());

    const Dataset data = load_dataset(a.data);
    json folds = json::array();
    std::vector<FoldEvaluation> evaluations;
    for (const auto& file : files) {
        const FoldModel model = fold_model_from_json(read_json_file(file));
        if (a.fold && model.fold != *a.fold) continue;
        std::vector<int> ids = model.test_ids;
        if (a.all) {
            ids.resize(data.size());
            for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
        }
        for (const int id : ids) {
            if (id < 0 || static_cast<std::size_t>(id) >= data.size()) {
                throw Error(ErrorKind::shape_mismatch, "test id " + std::to_string(id) + " is outside the dataset");
            }
        }
        const Dataset subset = data.subset(ids);
        const ModelPrediction pred = predict_with_model(model, subset);
        const FoldEvaluation fe = evaluate_fold(pred.predicted, pred.sick_scores, subset.class_labels());
        evaluations.push_back(fe);
        folds.push_back({{"fold", model.fold},
                         {"test_ids", ids},
                         {"predicted", pred.predicted},
                         {"sick_scores", pred.sick_scores},
                         {"metrics", to_json(fe.report)}});
    }
    if (evaluations.empty()) throw Error(ErrorKind::usage, "no model for the requested fold");
    const Aggregate agg = aggregate(evaluations);
    const json doc = {{"folds", folds}, {"pooled", to_json(agg.pooled)}, {"mean", to_json(agg.mean)}};
    if (a.out.empty()) {
        out << doc.dump(2) << "\n";
    } else {
        write_text_file(a.out, doc.dump(2) + "\n");
        out << csv_header() << "\n" << csv_row(agg.pooled) << "\n";
    }
    return kExitOk;
}

struct ReportArgs {
    std::vector<std::string> runs;
    std::string aggregate = "pooled";
    std::string out;
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
    std::string csv = results_header() + "\n";
    for (const auto& run : a.runs) {
        fs::path path(run);
        if (fs::is_directory(path)) path /= "report.json";
        const json doc = read_json_file(path);
        try {
            if (doc.at("format").get<std::string>() != "fcmdnn-run-report") {
                throw Error(ErrorKind::parse, path.string() + " is not a run report");
            }
            if (doc.at("version").get<int>() != kReportFormatVersion) {
                throw Error(ErrorKind::incompatible_version, path.string() + " has report version " +
                                                                 std::to_string(doc.at("version").get<int>()));
            }
            const MetricsReport r = metrics_from_json(doc.at(a.aggregate));
            csv += results_row(doc.at("model").get<std::string>(), doc.at("k").get<int>(), r) + "\n";
        } catch (const json::exception& e) {
            throw Error(ErrorKind::parse, path.string() + ": " + e.what());
        }
    }
    if (a.out.empty()) {
        out << csv;
    } else {
        write_text_file(a.out, csv);
        out << "wrote " << a.runs.size() << " rows to " << a.out << "\n";
    }
    return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"FCM-DNN, DNN and NN image classifiers with K-fold evaluation", "fcmdnn"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Write a seeded synthetic dataset");
    synth_cmd->add_option("--healthy", synth.healthy, "Healthy image count")->required();
    synth_cmd->add_option("--sick", synth.sick, "Sick image count")->required();
    synth_cmd->add_option("--side", synth.side, "Image side in pixels")->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed, "Generator seed")->required();
    synth_cmd->add_option("--out", synth.out, "Output directory")->required();

    PreprocessArgs pre;
    auto* pre_cmd = app.add_subcommand("preprocess", "Resize a dataset and write it back out");
    pre_cmd->add_option("--data", pre.data, "Dataset root (healthy/, sick/)")->required();
    pre_cmd->add_option("--out", pre.out, "Output directory")->required();
    pre_cmd->add_option("--side", pre.side, "Target side in pixels")->capture_default_str();

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Run K-fold training and evaluation");
    train_cmd->add_option("--model", train_args.model, "nn, dnn or fcm-dnn")->required();
    train_cmd->add_option("--data", train_args.data, "Dataset root")->required();
    train_cmd->add_option("--folds", train_args.folds, "Number of folds")->capture_default_str();
    train_cmd->add_option("--config", train_args.config, "JSON config overlay");
    train_cmd->add_option("--seed", train_args.seed, "Master seed (falls back to FCMDNN_SEED)");
    train_cmd->add_option("--out", train_args.out, "Output directory")->required();
    train_cmd->add_option("--jobs", train_args.jobs, "Folds run in parallel")->capture_default_str();
    train_cmd->add_option("--side", train_args.side, "Resize target side");
    train_cmd->add_option("--clusters-per-class", train_args.clusters_per_class, "FCM clusters per class");
    train_cmd->add_flag("--paper-order", train_args.paper_order, "Normalize and cluster before splitting");
    train_cmd->add_flag("--joint-clustering", train_args.joint, "Cluster both classes together");

    EvaluateArgs eval;
    auto* eval_cmd = app.add_subcommand("evaluate", "Re-run frozen fold models");
    eval_cmd->add_option("--model-dir", eval.model_dir, "Training output or its models/ directory")->required();
    eval_cmd->add_option("--data", eval.data, "Dataset root")->required();
    eval_cmd->add_option("--fold", eval.fold, "Evaluate only this fold");
    eval_cmd->add_flag("--all", eval.all, "Evaluate on every sample instead of each fold's test split");
    eval_cmd->add_option("--out", eval.out, "Write the metrics JSON here instead of stdout");

    ReportArgs rep;
    auto* rep_cmd = app.add_subcommand("report", "Collect run reports into one results table");
    rep_cmd->add_option("--runs", rep.runs, "Training output directories or report.json files")->required();
    rep_cmd->add_option("--aggregate", rep.aggregate, "pooled or mean")
        ->check(CLI::IsMember({"pooled", "mean"}))
        ->capture_default_str();
    rep_cmd->add_option("--out", rep.out, "CSV output file");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o;
        std::ostringstream e_out;
        const int code = app.exit(e, o, e_out);
        out << o.str();
        err << e_out.str();
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*synth_cmd) return cmd_synth(synth, out);
        if (*pre_cmd) return cmd_preprocess(pre, out);
        if (*train_cmd) return cmd_train(train_args, out, err);
        if (*eval_cmd) return cmd_evaluate(eval, out);
        if (*rep_cmd) return cmd_report(rep, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const json::exception& e) {
        err << "error: parse error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}

} // namespace fcmdnn
