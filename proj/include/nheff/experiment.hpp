#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nheff/model.hpp"

namespace nheff {

using Json = nlohmann::ordered_json;

// One validation finding, located by a JSON pointer into the config.
struct ValidationIssue {
  std::string path;     // e.g. "/experiment/steps"
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> violations;  // block the run
  std::vector<ValidationIssue> warnings;    // reported, run proceeds

  bool ok() const { return violations.empty(); }
};

// Everything a run produces, before touching the filesystem. result is the
// machine-readable document, trace_csv the full per-step/per-node table,
// summary a short human-readable digest.
struct RunOutputs {
  Json result;
  std::string trace_csv;
  std::string summary;
};

// Structural and semantic validation of a config document. Never throws on
// malformed input; every problem becomes a violation with a JSON-pointer
// path. A loop that passes close to a branch point is a warning, not a
// violation: the run may still fail at run time.
ValidationReport validate_config(const Json& config);

// Runs the experiment described by the config. Throws std::invalid_argument
// when the config fails validation and numerical_error when the computation
// breaks down (e.g. a loop reaching a branch point).
RunOutputs run_experiment(const Json& config, unsigned long long seed);

// Writes trace.csv, result.json, and summary.txt into `directory` (created
// if missing). Returns the path of result.json.
std::string write_outputs(const RunOutputs& outputs, const std::string& directory);

}  // namespace nheff
