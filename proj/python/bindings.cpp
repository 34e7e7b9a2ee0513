#include "fcmdnn/error.hpp"
#include "fcmdnn/fcm.hpp"
#include "fcmdnn/metrics.hpp"
#include "fcmdnn/partition.hpp"
#include "fcmdnn/pipeline.hpp"
#include "fcmdnn/preprocess.hpp"
#include "fcmdnn/serialize.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace fcmdnn;

namespace {

// Datasets cross the boundary as (pixels n x side*side, labels, side, ids).
struct PyDataset {
    Matrix pixels;
    std::vector<int> labels;
    int side = 0;
    std::vector<int> ids;
};

PyDataset to_py(const Dataset& d) {
    check_uniform_shape(d);
    PyDataset out;
    out.side = d.samples.empty() ? 0 : d.samples[0].width;
    out.pixels = d.feature_matrix();
    out.labels = d.class_labels();
    for (const auto& s : d.samples) out.ids.push_back(s.id);
    return out;
}

Dataset from_py(const Matrix& pixels, const std::vector<int>& labels, int side) {
    if (static_cast<std::size_t>(pixels.rows()) != labels.size())
        throw Error(ErrorKind::shape_mismatch, "pixels and labels disagree on the sample count");
    if (pixels.cols() != static_cast<Eigen::Index>(side) * side)
        throw Error(ErrorKind::shape_mismatch, "pixel rows must hold side*side values");
    Dataset d;
    for (Eigen::Index i = 0; i < pixels.rows(); ++i) {
        Sample s;
        s.id = static_cast<int>(i);
        s.width = s.height = side;
        s.class_label = labels[static_cast<std::size_t>(i)];
        s.pixels.resize(static_cast<std::size_t>(pixels.cols()));
        for (Eigen::Index j = 0; j < pixels.cols(); ++j) s.pixels[static_cast<std::size_t>(j)] = pixels(i, j);
        d.samples.push_back(std::move(s));
    }
    d.validate();
    return d;
}

py::tuple dataset_tuple(const Dataset& d) {
    PyDataset p = to_py(d);
    return py::make_tuple(p.pixels, p.labels, p.side, p.ids);
}

Normalization normalization_from(const std::string& name) {
    if (name == "scale_by_255") return Normalization::scale_by_255;
    if (name == "per_attribute_minmax") return Normalization::per_attribute_minmax;
    throw Error(ErrorKind::configuration, "unknown normalization '" + name + "'");
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Fuzzy c-means clustering, maxout networks and cross-validated evaluation";

    static py::exception<Error> error(m, "FcmdnnError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = py::reinterpret_borrow<py::object>(error)(e.what());
            exc.attr("kind") = std::string(to_string(e.kind()));
            PyErr_SetObject(error.ptr(), exc.ptr());
        }
    });

    m.def("gen_synthetic",
          [](int healthy, int sick, int side, std::uint64_t seed) { return dataset_tuple(gen_synthetic(healthy, sick, side, seed)); },
          py::arg("healthy"), py::arg("sick"), py::arg("side"), py::arg("seed"));

    m.def("load_dataset", [](const std::string& root) { return dataset_tuple(load_dataset(root)); }, py::arg("root"));

    m.def("write_dataset",
          [](const Matrix& pixels, const std::vector<int>& labels, int side, const std::string& root) {
              write_dataset(from_py(pixels, labels, side), root);
          },
          py::arg("pixels"), py::arg("labels"), py::arg("side"), py::arg("root"));

    m.def("preprocess",
          [](const Matrix& pixels, const std::vector<int>& labels, int side, int target_side, const std::string& normalization) {
              PreprocessConfig c;
              c.target_side = target_side;
              c.normalization = normalization_from(normalization);
              const Dataset d = from_py(pixels, labels, side);
              MinMaxStats stats;
              const MinMaxStats* fitted = nullptr;
              if (c.normalization == Normalization::per_attribute_minmax) {
                  stats = fit_minmax(resize_all(d, target_side));
                  fitted = &stats;
              }
              return prepare_features(d, c, fitted).feature_matrix();
          },
          py::arg("pixels"), py::arg("labels"), py::arg("side"), py::arg("target_side") = 100,
          py::arg("normalization") = "scale_by_255");

    m.def("make_fold_plan",
          [](int n, int k, std::uint64_t seed, const std::optional<std::vector<int>>& stratify) {
              return to_json(make_fold_plan(n, k, seed, stratify)).dump();
          },
          py::arg("n"), py::arg("k"), py::arg("seed"), py::arg("stratify_labels") = std::nullopt);

    m.def("run_fcm",
          [](const Matrix& x, int clusters, double fuzzifier, int max_iterations, double min_gain, std::uint64_t seed) {
              FcmConfig c;
              c.num_clusters = clusters;
              c.fuzzifier = fuzzifier;
              c.max_iterations = max_iterations;
              c.min_gain = min_gain;
              c.seed = seed;
              const FcmState s = run_fcm(x, c);
              py::dict out;
              out["memberships"] = s.memberships;
              out["centers"] = s.centers;
              out["objective_history"] = s.objective_history;
              out["iterations"] = s.iterations_run;
              out["converged"] = s.converged;
              out["reseeded_centers"] = s.reseeded_centers;
              return out;
          },
          py::arg("x"), py::arg("clusters"), py::arg("fuzzifier") = 2.0, py::arg("max_iterations") = 50,
          py::arg("min_gain") = 1e-4, py::arg("seed") = 0);

    m.def("metrics",
          [](long tp, long fp, long tn, long fn) { return to_json(report(ConfusionMatrix{tp, fp, tn, fn})).dump(); },
          py::arg("tp"), py::arg("fp"), py::arg("tn"), py::arg("fn"));

    m.def("confusion",
          [](const std::vector<int>& predicted, const std::vector<int>& actual) {
              const ConfusionMatrix cm = confusion(predicted, actual);
              return py::make_tuple(cm.tp, cm.fp, cm.tn, cm.fn);
          },
          py::arg("predicted"), py::arg("actual"));

    m.def("roc_auc",
          [](const std::vector<double>& scores, const std::vector<int>& actual) {
              const RocResult r = roc_auc(scores, actual);
              std::vector<std::pair<double, double>> curve;
              for (const auto& p : r.curve) curve.emplace_back(p.fpr, p.tpr);
              return py::make_tuple(r.auc, curve);
          },
          py::arg("scores"), py::arg("actual"));

    m.def("default_config", [](const std::string& model) { return to_json(ExperimentConfig::defaults_for(model_from_string(model))).dump(); },
          py::arg("model"));

    m.def("run_experiment",
          [](const Matrix& pixels, const std::vector<int>& labels, int side, const std::string& model,
             const std::string& overlay, std::optional<std::uint64_t> seed) {
              const Dataset d = from_py(pixels, labels, side);
              ExperimentConfig c = ExperimentConfig::defaults_for(model_from_string(model));
              if (!overlay.empty()) {
                  json j;
                  try {
                      j = json::parse(overlay);
                  } catch (const json::exception& e) {
                      throw Error(ErrorKind::configuration, e.what());
                  }
                  if (j.contains("model") && model_from_string(j.at("model").get<std::string>()) != c.model)
                      throw Error(ErrorKind::configuration, "overlay names a different model");
                  apply_config_overlay(c, j);
              }
              if (seed) c.master_seed = *seed;
              RunReport r;
              {
                  py::gil_scoped_release release;
                  r = run_experiment(d, c);
              }
              return to_json(r, false).dump();
          },
          py::arg("pixels"), py::arg("labels"), py::arg("side"), py::arg("model"), py::arg("overlay") = "",
          py::arg("seed") = std::nullopt);
}
