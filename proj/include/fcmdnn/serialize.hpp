#pragma once

#include "fcmdnn/fcm.hpp"
#include "fcmdnn/metrics.hpp"
#include "fcmdnn/partition.hpp"
#include "fcmdnn/pipeline.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace fcmdnn {

using json = nlohmann::json;

inline constexpr int kModelFormatVersion = 1;
inline constexpr int kReportFormatVersion = 1;

/// Exact text form of a double ("%a"); parsed back with strtod.
std::string hex_double(double v);
double parse_hex_double(const std::string& text);

json to_json(const FoldPlan& plan);
FoldPlan fold_plan_from_json(const json& j);

json to_json(const FcmState& state);

json to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const json& j);

json to_json(const NetworkSpec& spec);
NetworkSpec network_spec_from_json(const json& j);

/// Versioned model document: spec, preprocessing (with fitted ranges), every
/// weight tensor as hex-float strings, seed and the fold's test ids.
json to_json(const FoldModel& model);
/// Throws incompatible_version for a different format version, parse for malformed input.
FoldModel fold_model_from_json(const json& j);

json to_json(const ExperimentConfig& config);
/// Overlays the keys present in `j` onto `config`; unknown keys are a configuration error.
void apply_config_overlay(ExperimentConfig& config, const json& j);

/// Report document. The wall-clock field is omitted when `include_timing` is false,
/// which makes two runs with the same seed byte-identical.
json to_json(const RunReport& report, bool include_timing = true);

std::string roc_csv(const std::vector<RocPoint>& curve);

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace fcmdnn
