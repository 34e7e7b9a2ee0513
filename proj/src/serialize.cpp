#include "fcmdnn/serialize.hpp"

#include "fcmdnn/error.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace fcmdnn {

std::string hex_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

double parse_hex_double(const std::string& text) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
        throw Error(ErrorKind::parse, "bad number '" + text + "'");
    }
    return v;
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

std::string normalization_name(Normalization n) {
    return n == Normalization::scale_by_255 ? "scale_by_255" : "per_attribute_minmax";
}

Normalization normalization_from(const std::string& name) {
    if (name == "scale_by_255") return Normalization::scale_by_255;
    if (name == "per_attribute_minmax") return Normalization::per_attribute_minmax;
    throw Error(ErrorKind::configuration, "unknown normalization '" + name + "'");
}

json hex_array(const double* data, Eigen::Index count) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < count; ++i) arr.push_back(hex_double(data[i]));
    return arr;
}

std::vector<double> hex_vector(const json& arr) {
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& v : arr) out.push_back(parse_hex_double(v.get<std::string>()));
    return out;
}

json matrix_rows(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json optimizer_json(const OptimizerConfig& o) {
    if (o.kind == OptimizerKind::momentum_sgd) {
        return {{"kind", "momentum_sgd"}, {"learning_rate", o.learning_rate}, {"momentum", o.momentum}};
    }
    return {{"kind", "adaptive"}, {"rho", o.rho}, {"epsilon", o.epsilon}};
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw Error(ErrorKind::configuration, where + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) throw Error(ErrorKind::configuration, "unknown key '" + key + "' in " + where);
    }
}

OptimizerConfig optimizer_from(const json& j, OptimizerConfig base) {
    check_keys(j, {"kind", "learning_rate", "momentum", "rho", "epsilon"}, "optimizer");
    if (j.contains("kind")) {
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "momentum_sgd") {
            base.kind = OptimizerKind::momentum_sgd;
        } else if (kind == "adaptive") {
            base.kind = OptimizerKind::adaptive;
        } else {
            throw Error(ErrorKind::configuration, "unknown optimizer kind '" + kind + "'");
        }
    }
    if (j.contains("learning_rate")) base.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("momentum")) base.momentum = j.at("momentum").get<double>();
    if (j.contains("rho")) base.rho = j.at("rho").get<double>();
    if (j.contains("epsilon")) base.epsilon = j.at("epsilon").get<double>();
    return base;
}

} // namespace

json to_json(const FoldPlan& plan) {
    json folds = json::array();
    for (const auto& f : plan.folds) {
        folds.push_back({{"test", f.test_indices}, {"train", f.train_indices}, {"validation", f.validation_indices}});
    }
    return {{"k", plan.k}, {"seed", plan.seed}, {"stratified", plan.stratified}, {"folds", folds}};
}

FoldPlan fold_plan_from_json(const json& j) {
    try {
        FoldPlan plan;
        plan.k = j.at("k").get<int>();
        plan.seed = j.at("seed").get<std::uint64_t>();
        plan.stratified = j.at("stratified").get<bool>();
        for (const auto& f : j.at("folds")) {
            plan.folds.push_back({f.at("test").get<std::vector<int>>(), f.at("train").get<std::vector<int>>(),
                                  f.at("validation").get<std::vector<int>>()});
        }
        return plan;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse, std::string("fold plan: ") + e.what());
    }
}

json to_json(const FcmState& state) {
    return {{"centers", matrix_rows(state.centers)},
            {"memberships", matrix_rows(state.memberships)},
            {"objective_history", state.objective_history},
            {"iterations_run", state.iterations_run},
            {"converged", state.converged},
            {"reseeded_centers", state.reseeded_centers}};
}

json to_json(const MetricsReport& r) {
    json j = {{"tp", r.cm.tp}, {"fp", r.cm.fp}, {"tn", r.cm.tn}, {"fn", r.cm.fn}};
    for (const auto& name : kCriteria) j[name] = optional_number(criterion(r, name));
    j["fpr_percent"] = optional_number(MetricsReport::percent(r.fpr));
    j["fnr_percent"] = optional_number(MetricsReport::percent(r.fnr));
    j["undefined"] = r.undefined;
    if (!r.defined_counts.empty()) j["defined_counts"] = r.defined_counts;
    return j;
}

MetricsReport metrics_from_json(const json& j) {
    try {
        MetricsReport r;
        r.cm = {j.at("tp").get<long>(), j.at("fp").get<long>(), j.at("tn").get<long>(), j.at("fn").get<long>()};
        r.acc = optional_from(j, "acc");
        r.ppv = optional_from(j, "ppv");
        r.sen = optional_from(j, "sen");
        r.spc = optional_from(j, "spc");
        r.f1 = optional_from(j, "f1");
        r.fpr = optional_from(j, "fpr");
        r.fnr = optional_from(j, "fnr");
        r.auc = optional_from(j, "auc");
        if (j.contains("undefined")) r.undefined = j.at("undefined").get<std::map<std::string, std::string>>();
        if (j.contains("defined_counts")) r.defined_counts = j.at("defined_counts").get<std::map<std::string, int>>();
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse, std::string("metrics: ") + e.what());
    }
}

json to_json(const NetworkSpec& spec) {
    json layers = json::array();
    for (const auto& l : spec.layers) {
        json lj = {{"input_width", l.input_width}, {"output_width", l.output_width},
                   {"activation", to_string(l.activation)}};
        if (l.activation == Activation::maxout) lj["pieces"] = l.pieces;
        layers.push_back(std::move(lj));
    }
    return {{"layers", layers},
            {"loss", "cross_entropy"},
            {"l1", spec.l1},
            {"l2", spec.l2},
            {"optimizer", optimizer_json(spec.optimizer)},
            {"epochs", spec.epochs},
            {"batch_size", spec.batch_size == kFullBatch ? json("full") : json(spec.batch_size)},
            {"shuffle", spec.shuffle},
            {"seed", spec.seed}};
}

NetworkSpec network_spec_from_json(const json& j) {
    try {
        NetworkSpec spec;
        for (const auto& lj : j.at("layers")) {
            LayerSpec l;
            l.input_width = lj.at("input_width").get<int>();
            l.output_width = lj.at("output_width").get<int>();
            l.activation = activation_from_string(lj.at("activation").get<std::string>());
            if (lj.contains("pieces")) l.pieces = lj.at("pieces").get<int>();
            spec.layers.push_back(l);
        }
        if (j.at("loss").get<std::string>() != "cross_entropy") throw Error(ErrorKind::parse, "unknown loss");
        spec.l1 = j.at("l1").get<double>();
        spec.l2 = j.at("l2").get<double>();
        spec.optimizer = optimizer_from(j.at("optimizer"), OptimizerConfig{});
        spec.epochs = j.at("epochs").get<int>();
        const auto& batch = j.at("batch_size");
        spec.batch_size = batch.is_string() ? kFullBatch : batch.get<int>();
        spec.shuffle = j.at("shuffle").get<bool>();
        spec.seed = j.at("seed").get<std::uint64_t>();
        spec.validate();
        return spec;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse, std::string("network spec: ") + e.what());
    }
}

json to_json(const FoldModel& m) {
    json pre = {{"target_side", m.preprocess.target_side},
                {"normalization", normalization_name(m.preprocess.normalization)}};
    if (m.minmax) {
        pre["minmax"] = {{"min", hex_array(m.minmax->min.data(), static_cast<Eigen::Index>(m.minmax->min.size()))},
                         {"max", hex_array(m.minmax->max.data(), static_cast<Eigen::Index>(m.minmax->max.size()))}};
    }
    json layers = json::array();
    for (const auto& lp : m.params.layers) {
        json pieces = json::array();
        for (std::size_t p = 0; p < lp.weights.size(); ++p) {
            // Row-major weight order.
            const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w = lp.weights[p];
            pieces.push_back({{"rows", w.rows()},
                              {"cols", w.cols()},
                              {"weights", hex_array(w.data(), w.size())},
                              {"bias", hex_array(lp.biases[p].data(), lp.biases[p].size())}});
        }
        layers.push_back({{"pieces", pieces}});
    }
    return {{"format", "fcmdnn-model"},
            {"version", kModelFormatVersion},
            {"fold", m.fold},
            {"model", to_string(m.model)},
            {"clusters_per_class", m.clusters_per_class},
            {"preprocess", pre},
            {"spec", to_json(m.spec)},
            {"seed", m.spec.seed},
            {"parameters", layers},
            {"test_ids", m.test_ids}};
}

FoldModel fold_model_from_json(const json& j) {
    try {
        if (!j.is_object() || j.value("format", "") != "fcmdnn-model") {
            throw Error(ErrorKind::parse, "not an fcmdnn model document");
        }
        const int version = j.at("version").get<int>();
        if (version != kModelFormatVersion) {
            throw Error(ErrorKind::incompatible_version, "model format version " + std::to_string(version) +
                                                             " (this build reads version " +
                                                             std::to_string(kModelFormatVersion) + ")");
        }
        FoldModel m;
        m.fold = j.at("fold").get<int>();
        m.model = model_from_string(j.at("model").get<std::string>());
        m.clusters_per_class = j.at("clusters_per_class").get<int>();
        const auto& pre = j.at("preprocess");
        m.preprocess.target_side = pre.at("target_side").get<int>();
        m.preprocess.normalization = normalization_from(pre.at("normalization").get<std::string>());
        if (pre.contains("minmax")) {
            m.minmax = MinMaxStats{hex_vector(pre.at("minmax").at("min")), hex_vector(pre.at("minmax").at("max"))};
        }
        m.spec = network_spec_from_json(j.at("spec"));
        const auto& layers = j.at("parameters");
        if (layers.size() != m.spec.layers.size()) throw Error(ErrorKind::parse, "layer count differs from spec");
        for (const auto& lj : layers) {
            LayerParams lp;
            for (const auto& pj : lj.at("pieces")) {
                const auto rows = pj.at("rows").get<Eigen::Index>();
                const auto cols = pj.at("cols").get<Eigen::Index>();
                const auto w = hex_vector(pj.at("weights"));
                const auto b = hex_vector(pj.at("bias"));
                if (static_cast<Eigen::Index>(w.size()) != rows * cols || static_cast<Eigen::Index>(b.size()) != rows) {
                    throw Error(ErrorKind::parse, "tensor size does not match its shape");
                }
                lp.weights.push_back(
                    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(w.data(), rows, cols));
                lp.biases.push_back(Eigen::Map<const Eigen::VectorXd>(b.data(), rows));
            }
            m.params.layers.push_back(std::move(lp));
        }
        m.params.accum_a = zeros_like(m.params.layers);
        if (m.spec.optimizer.kind == OptimizerKind::adaptive) m.params.accum_b = zeros_like(m.params.layers);
        check_params(m.spec, m.params);
        m.test_ids = j.at("test_ids").get<std::vector<int>>();
        return m;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse, std::string("model: ") + e.what());
    }
}

json to_json(const ExperimentConfig& c) {
    json net = {{"hidden", c.network.hidden},
                {"activation", to_string(c.network.hidden_activation)},
                {"maxout_pieces", c.network.maxout_pieces},
                {"l1", c.network.l1},
                {"l2", c.network.l2},
                {"optimizer", optimizer_json(c.network.optimizer)},
                {"epochs", c.network.epochs},
                {"batch_size", c.network.batch_size == kFullBatch ? json("full") : json(c.network.batch_size)},
                {"shuffle", c.network.shuffle}};
    return {{"model", to_string(c.model)},
            {"folds", c.k},
            {"seed", c.master_seed},
            {"clusters_per_class", c.clusters_per_class},
            {"stratify", c.stratify},
            {"paper_order", c.paper_order},
            {"joint_clustering", c.joint_clustering},
            {"preprocess",
             {{"target_side", c.preprocess.target_side},
              {"normalization", normalization_name(c.preprocess.normalization)}}},
            {"fcm",
             {{"fuzzifier", c.fcm.fuzzifier}, {"max_iterations", c.fcm.max_iterations}, {"min_gain", c.fcm.min_gain}}},
            {"network", net}};
}

void apply_config_overlay(ExperimentConfig& c, const json& j) {
    try {
        check_keys(j, {"model", "folds", "seed", "clusters_per_class", "stratify", "paper_order", "joint_clustering",
                       "preprocess", "fcm", "network", "jobs"},
                   "config");
        if (j.contains("model")) {
            const ModelKind kind = model_from_string(j.at("model").get<std::string>());
            if (kind != c.model) {
                const ExperimentConfig base = ExperimentConfig::defaults_for(kind);
                c.model = kind;
                c.network = base.network;
            }
        }
        if (j.contains("folds")) c.k = j.at("folds").get<int>();
        if (j.contains("seed")) c.master_seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("clusters_per_class")) c.clusters_per_class = j.at("clusters_per_class").get<int>();
        if (j.contains("stratify")) c.stratify = j.at("stratify").get<bool>();
        if (j.contains("paper_order")) c.paper_order = j.at("paper_order").get<bool>();
        if (j.contains("joint_clustering")) c.joint_clustering = j.at("joint_clustering").get<bool>();
        if (j.contains("jobs")) c.jobs = j.at("jobs").get<int>();
        if (j.contains("preprocess")) {
            const auto& p = j.at("preprocess");
            check_keys(p, {"target_side", "normalization"}, "preprocess");
            if (p.contains("target_side")) c.preprocess.target_side = p.at("target_side").get<int>();
            if (p.contains("normalization")) {
                c.preprocess.normalization = normalization_from(p.at("normalization").get<std::string>());
            }
        }
        if (j.contains("fcm")) {
            const auto& f = j.at("fcm");
            check_keys(f, {"fuzzifier", "max_iterations", "min_gain"}, "fcm");
            if (f.contains("fuzzifier")) c.fcm.fuzzifier = f.at("fuzzifier").get<double>();
            if (f.contains("max_iterations")) c.fcm.max_iterations = f.at("max_iterations").get<int>();
            if (f.contains("min_gain")) c.fcm.min_gain = f.at("min_gain").get<double>();
        }
        if (j.contains("network")) {
            const auto& n = j.at("network");
            check_keys(n, {"hidden", "activation", "maxout_pieces", "l1", "l2", "optimizer", "epochs", "batch_size",
                           "shuffle"},
                       "network");
            if (n.contains("hidden")) c.network.hidden = n.at("hidden").get<std::vector<int>>();
            if (n.contains("activation")) {
                c.network.hidden_activation = activation_from_string(n.at("activation").get<std::string>());
            }
            if (n.contains("maxout_pieces")) c.network.maxout_pieces = n.at("maxout_pieces").get<int>();
            if (n.contains("l1")) c.network.l1 = n.at("l1").get<double>();
            if (n.contains("l2")) c.network.l2 = n.at("l2").get<double>();
            if (n.contains("optimizer")) c.network.optimizer = optimizer_from(n.at("optimizer"), c.network.optimizer);
            if (n.contains("epochs")) c.network.epochs = n.at("epochs").get<int>();
            if (n.contains("batch_size")) {
                const auto& b = n.at("batch_size");
                c.network.batch_size = b.is_string() && b.get<std::string>() == "full" ? kFullBatch : b.get<int>();
            }
            if (n.contains("shuffle")) c.network.shuffle = n.at("shuffle").get<bool>();
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::configuration, std::string("config: ") + e.what());
    }
}

json to_json(const RunReport& r, bool include_timing) {
    json folds = json::array();
    for (const auto& f : r.folds) {
        json history = json::array();
        for (const auto& h : f.history) {
            history.push_back({{"epoch", h.epoch},
                               {"train_loss", h.train_loss},
                               {"validation_loss", optional_number(h.validation_loss)}});
        }
        json fj = {{"fold", f.fold},
                   {"train_count", f.train_count},
                   {"validation_count", f.validation_count},
                   {"test_count", f.test_ids.size()},
                   {"test_ids", f.test_ids},
                   {"predicted", f.predicted},
                   {"sick_scores", f.evaluation.scores},
                   {"metrics", to_json(f.evaluation.report)},
                   {"history", history}};
        if (f.cluster_accuracy) {
            fj["cluster_accuracy"] = *f.cluster_accuracy;
            fj["predicted_clusters"] = f.predicted_clusters;
            fj["true_clusters"] = f.true_clusters;
        }
        folds.push_back(std::move(fj));
    }
    json ledger = json::array();
    for (const auto& [name, seed] : r.seed_ledger) ledger.push_back({{"name", name}, {"seed", seed}});
    json j = {{"format", "fcmdnn-run-report"},
              {"version", kReportFormatVersion},
              {"model", to_string(r.config.model)},
              {"k", r.config.k},
              {"n", r.n},
              {"config", to_json(r.config)},
              {"folds", folds},
              {"pooled", to_json(r.pooled)},
              {"mean", to_json(r.mean)},
              {"pooled_cluster_accuracy", optional_number(r.pooled_cluster_accuracy)},
              {"seed_ledger", ledger}};
    if (include_timing) j["wall_clock_seconds"] = r.duration_seconds;
    return j;
}

std::string roc_csv(const std::vector<RocPoint>& curve) {
    std::ostringstream out;
    out.precision(17);
    out << "fpr,tpr\n";
    for (const auto& p : curve) out << p.fpr << ',' << p.tpr << '\n';
    return out.str();
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::parse, path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

} // namespace fcmdnn
