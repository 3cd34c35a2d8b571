// Copyright 2026 The tcprio Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Batch experiment pipeline over a dataset laid out as
//
//   <dataset_root>/<project>/<version>/coverage.csv   (or coverage.json)
//                                     /features.csv
//                                     /outcome.json
//
// Versions are ordered by natural sort of their directory names, earliest
// first. Outputs land under <output_dir>/<project>/<version>/ plus the
// report files at the top of <output_dir>.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tcprio/cluster_tcp.hpp"
#include "tcprio/defect_prediction.hpp"
#include "tcprio/evaluation.hpp"
#include "tcprio/strategies.hpp"

namespace tcprio {

struct StrategySpec {
  std::string name;   // random, total, additional, clustering, or one of those + "+fp"
  std::string label;  // output label, defaults to name
  StrategyConfig strategy;
  std::optional<InternalMode> internal_mode;
  bool fp_batch_sort = false;

  bool uses_fault_proneness() const;
};

struct ProjectSpec {
  std::string name;
  // Evaluate only the last N versions; all versions when unset.
  std::optional<std::size_t> evaluate_last;
};

struct PipelineConfig {
  std::filesystem::path dataset_root;
  std::vector<ProjectSpec> projects;
  std::vector<StrategySpec> strategies;
  std::size_t k = 200;
  ThresholdSpec threshold;
  double lambda = 1.0;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;

  SmoteParams smote;          // seed is derived per version
  TrainingParams training;
  double bug_hit_threshold = kDefaultBugHitThreshold;

  // Throws ConfigError.
  void validate() const;
};

// Parses the JSON config. Keys: dataset_root, projects, strategies, K,
// threshold_mode, threshold_value, lambda, seed, output_dir. Unknown keys
// are rejected. Relative paths are resolved against `base_dir`.
PipelineConfig parse_pipeline_config(std::istream& in,
                                     const std::filesystem::path& base_dir);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

// Parses "name" or "name:key=value,key=value" strategy strings used on the
// command line, e.g. "additional:tie_break=random,reset=false".
StrategySpec parse_strategy_spec(const std::string& text);

using WarningSink = std::function<void(const std::string&)>;

struct PredictSummary {
  std::size_t written = 0;
  std::size_t skipped = 0;
  std::size_t bug_hits = 0;  // versions whose buggy units score above threshold
};

struct PrioritizeSummary {
  std::size_t written = 0;
};

// Trains one model per evaluated version on every version of the other
// projects found under dataset_root plus the earlier versions of the same
// project, and writes scores.csv and model.json. Versions lacking enough
// buggy history are skipped with a warning.
PredictSummary cmd_predict(const PipelineConfig& config, const WarningSink& warn = {});

// Writes order_<label>.csv for every evaluated (version, strategy).
PrioritizeSummary cmd_prioritize(const PipelineConfig& config);

// Writes report.csv, pairwise.csv and cells.csv.
EvaluationReport cmd_evaluate(const PipelineConfig& config);

// Directory names under `project_dir` in natural order.
std::vector<std::string> list_versions(const std::filesystem::path& project_dir);

// Versions of `project` selected by its evaluation window.
std::vector<std::string> evaluated_versions(const PipelineConfig& config,
                                            const ProjectSpec& project);

}  // namespace tcprio
