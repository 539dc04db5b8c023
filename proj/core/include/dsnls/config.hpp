#pragma once

// Line-oriented experiment configuration:
//
//   # comment
//   [model]       alpha, lambda, epsilon
//   [grid]        J
//   [noise]       P, spectrum ("power 6" or "list a, b, ..."), seed
//   [time]        tau, T
//   [experiment]  kind, realizations, workers, initial, initial_values,
//                 observables, ladder, reference_tau, horizons,
//                 record_stride, truncation_radius
//
// Values may be written as integer powers ("2^-6"). Lists are comma
// separated. initial_values holds one explicit start vector as "re:im"
// pairs and is appended after the named profiles.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dsnls/harness.hpp"

namespace dsnls {

/// (key, value) with key either bare ("epsilon") or qualified ("model.epsilon").
using Override = std::pair<std::string, std::string>;

/// Splits "key=value"; throws ParseError when there is no '='.
Override parse_override(const std::string& text);

/// Parses and validates. Overrides are applied after the document.
/// Throws ParseError naming line and key.
ExperimentConfig parse_config(const std::string& text, const std::vector<Override>& overrides = {});

std::string serialize_config(const ExperimentConfig& config);

/// Names of the built-in presets in listing order.
std::vector<std::string> preset_names();
/// One-line description for `presets`.
std::string preset_summary(const std::string& name);
/// Config text of a preset; throws std::invalid_argument for unknown names.
std::string preset_text(const std::string& name);

struct ManifestInfo {
  std::string command;
  std::vector<Override> overrides;
  std::vector<std::string> files;
  std::string status = "ok";
};

void write_manifest(std::ostream& out, const RunRecord& record, const ManifestInfo& info);

/// Writes <stem>.csv for every table plus manifest.txt into `dir`,
/// creating it if needed. Throws std::runtime_error on I/O failure.
void write_run(const std::filesystem::path& dir, const RunRecord& record, ManifestInfo info);

}  // namespace dsnls
