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

#include "tcprio/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tcprio/errors.hpp"
#include "tcprio/evaluation.hpp"
#include "tcprio/random.hpp"

namespace fs = std::filesystem;

namespace tcprio {

namespace {

const std::set<std::string> kBaseStrategies = {"random", "total", "additional",
                                               "clustering"};

bool natural_less(const std::string& a, const std::string& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (std::isdigit(static_cast<unsigned char>(a[i])) &&
        std::isdigit(static_cast<unsigned char>(b[j]))) {
      std::size_t ie = i, je = j;
      while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
      while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
      auto na = a.substr(i, ie - i), nb = b.substr(j, je - j);
      na.erase(0, std::min(na.find_first_not_of('0'), na.size()));
      nb.erase(0, std::min(nb.find_first_not_of('0'), nb.size()));
      if (na.size() != nb.size()) return na.size() < nb.size();
      if (na != nb) return na < nb;
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  if ((a.size() - i) != (b.size() - j)) return a.size() - i < b.size() - j;
  return a < b;
}

std::string base_name(const std::string& name) {
  return name.ends_with("+fp") ? name.substr(0, name.size() - 3) : name;
}

void apply_strategy_param(StrategySpec& spec, const std::string& key,
                          const std::string& value) {
  auto boolean = [&] {
    if (value == "true") return true;
    if (value == "false") return false;
    throw ConfigError("strategy parameter '" + key + "' must be true or false");
  };
  if (key == "tie_break") {
    if (value == "by_index") {
      spec.strategy.tie_break = TieBreak::kByIndex;
    } else if (value == "random") {
      spec.strategy.tie_break = TieBreak::kRandom;
    } else {
      throw ConfigError("tie_break must be by_index or random");
    }
  } else if (key == "reset") {
    spec.strategy.reset_on_full_coverage = boolean();
  } else if (key == "prefer_total_on_tie") {
    spec.strategy.prefer_total_on_tie = boolean();
  } else if (key == "internal_mode") {
    if (value == "total") {
      spec.internal_mode = InternalMode::kTotal;
    } else if (value == "fp_rank") {
      spec.internal_mode = InternalMode::kFpRank;
    } else {
      throw ConfigError("internal_mode must be total or fp_rank");
    }
  } else if (key == "fp_batch_sort") {
    spec.fp_batch_sort = boolean();
  } else if (key == "label") {
    spec.label = value;
  } else {
    throw ConfigError("unknown strategy parameter '" + key + "'");
  }
}

StrategySpec make_spec(const std::string& name) {
  if (!kBaseStrategies.contains(base_name(name)) || name == "random+fp") {
    throw ConfigError("unknown strategy '" + name + "'");
  }
  StrategySpec spec;
  spec.name = name;
  spec.label = name;
  return spec;
}

StrategySpec strategy_from_json(const nlohmann::json& j) {
  if (j.is_string()) return make_spec(j.get<std::string>());
  if (!j.is_object() || !j.contains("name")) {
    throw ConfigError("strategy entries must be a name or {name, params}");
  }
  auto spec = make_spec(j.at("name").get<std::string>());
  for (const auto& [key, value] : j.items()) {
    if (key == "name") continue;
    if (key == "label") {
      spec.label = value.get<std::string>();
    } else if (key == "params") {
      for (const auto& [pk, pv] : value.items()) {
        apply_strategy_param(spec, pk,
                             pv.is_string() ? pv.get<std::string>() : pv.dump());
      }
    } else {
      throw ConfigError("unknown strategy field '" + key + "'");
    }
  }
  return spec;
}

std::string cell_tag(const std::string& kind, const std::string& project,
                     const std::string& version) {
  return kind + ":" + project + "/" + version;
}

fs::path version_dir(const PipelineConfig& c, const std::string& project,
                     const std::string& version) {
  return c.dataset_root / project / version;
}

fs::path output_version_dir(const PipelineConfig& c, const std::string& project,
                            const std::string& version) {
  return c.output_dir / project / version;
}

CoverageMatrix load_version_coverage(const PipelineConfig& c,
                                     const std::string& project,
                                     const std::string& version) {
  const auto dir = version_dir(c, project, version);
  if (fs::exists(dir / "coverage.csv")) {
    return load_coverage_matrix_file((dir / "coverage.csv").string());
  }
  if (fs::exists(dir / "coverage.json")) {
    return load_coverage_matrix_file((dir / "coverage.json").string());
  }
  throw ParseError("no coverage file in '" + dir.string() + "'");
}

std::ofstream open_output(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return out;
}

// Feature deltas per (project, version), computed on first use.
class DeltaCache {
 public:
  explicit DeltaCache(const PipelineConfig& config) : config_(config) {}

  const std::vector<std::string>& versions(const std::string& project) {
    auto it = versions_.find(project);
    if (it == versions_.end()) {
      it = versions_.emplace(project, list_versions(config_.dataset_root / project))
               .first;
    }
    return it->second;
  }

  const FeatureDataset& deltas(const std::string& project, std::size_t index) {
    const auto& vs = versions(project);
    const auto key = std::make_pair(project, vs[index]);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const auto current = load(project, vs[index]);
    FeatureDataset previous;
    previous.feature_names = current.feature_names;
    if (index > 0) previous = load(project, vs[index - 1]);
    return cache_.emplace(key, build_feature_deltas(current, previous)).first->second;
  }

 private:
  FeatureDataset load(const std::string& project, const std::string& version) {
    const auto path = version_dir(config_, project, version) / "features.csv";
    if (!fs::exists(path)) {
      throw MissingFeatureFileError("missing feature file '" + path.string() + "'");
    }
    return load_feature_file(path.string());
  }

  const PipelineConfig& config_;
  std::map<std::string, std::vector<std::string>> versions_;
  std::map<std::pair<std::string, std::string>, FeatureDataset> cache_;
};

void append(FeatureDataset& into, const FeatureDataset& from) {
  if (into.feature_names.empty()) into.feature_names = from.feature_names;
  if (into.feature_names != from.feature_names) {
    throw FeatureNameMismatchError("feature names differ across training versions");
  }
  into.samples.insert(into.samples.end(), from.samples.begin(), from.samples.end());
}

}  // namespace

bool StrategySpec::uses_fault_proneness() const { return name.ends_with("+fp"); }

void PipelineConfig::validate() const {
  if (projects.empty()) throw ConfigError("config needs at least one project");
  if (strategies.empty()) throw ConfigError("config needs at least one strategy");
  if (k == 0) throw ConfigError("K must be at least 1");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (threshold.mode == ThresholdMode::kPercentile &&
      !(threshold.value >= 0.0 && threshold.value <= 100.0)) {
    throw ConfigError("percentile threshold must be in [0,100]");
  }
  std::set<std::string> labels;
  for (const auto& s : strategies) {
    if (!labels.insert(s.label).second) {
      throw ConfigError("duplicate strategy label '" + s.label + "'");
    }
  }
  if (dataset_root.empty()) throw ConfigError("dataset_root is required");
  if (output_dir.empty()) throw ConfigError("output_dir is required");
}

PipelineConfig parse_pipeline_config(std::istream& in, const fs::path& base_dir) {
  PipelineConfig config;
  bool has_seed = false;
  try {
    const auto doc = nlohmann::json::parse(in);
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
      if (key == "dataset_root") {
        config.dataset_root = base_dir / value.get<std::string>();
      } else if (key == "output_dir") {
        config.output_dir = base_dir / value.get<std::string>();
      } else if (key == "projects") {
        for (const auto& p : value) {
          if (p.is_string()) {
            config.projects.push_back({p.get<std::string>(), std::nullopt});
          } else {
            ProjectSpec spec{p.at("name").get<std::string>(), std::nullopt};
            if (p.contains("evaluate_last")) {
              spec.evaluate_last = p.at("evaluate_last").get<std::size_t>();
            }
            config.projects.push_back(std::move(spec));
          }
        }
      } else if (key == "strategies") {
        for (const auto& s : value) config.strategies.push_back(strategy_from_json(s));
      } else if (key == "K") {
        config.k = value.get<std::size_t>();
      } else if (key == "threshold_mode") {
        const auto mode = value.get<std::string>();
        if (mode == "absolute") {
          config.threshold.mode = ThresholdMode::kAbsolute;
        } else if (mode == "percentile") {
          config.threshold.mode = ThresholdMode::kPercentile;
        } else {
          throw ConfigError("threshold_mode must be absolute or percentile");
        }
      } else if (key == "threshold_value") {
        config.threshold.value = value.get<double>();
      } else if (key == "lambda") {
        config.lambda = value.get<double>();
      } else if (key == "seed") {
        config.seed = value.get<std::uint64_t>();
        has_seed = true;
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!has_seed) throw ConfigError("config: seed is required");
  config.validate();
  return config;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  return parse_pipeline_config(in, path.parent_path());
}

StrategySpec parse_strategy_spec(const std::string& text) {
  const auto colon = text.find(':');
  auto spec = make_spec(text.substr(0, colon));
  if (colon == std::string::npos) return spec;
  std::stringstream params(text.substr(colon + 1));
  std::string item;
  while (std::getline(params, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("strategy parameter '" + item + "' is not key=value");
    }
    apply_strategy_param(spec, item.substr(0, eq), item.substr(eq + 1));
  }
  return spec;
}

std::vector<std::string> list_versions(const fs::path& project_dir) {
  if (!fs::is_directory(project_dir)) {
    throw DataError("project directory '" + project_dir.string() + "' not found");
  }
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(project_dir)) {
    if (entry.is_directory()) out.push_back(entry.path().filename().string());
  }
  std::sort(out.begin(), out.end(), natural_less);
  return out;
}

std::vector<std::string> evaluated_versions(const PipelineConfig& config,
                                            const ProjectSpec& project) {
  auto all = list_versions(config.dataset_root / project.name);
  if (project.evaluate_last && *project.evaluate_last < all.size()) {
    all.erase(all.begin(),
              all.end() - static_cast<std::ptrdiff_t>(*project.evaluate_last));
  }
  return all;
}

PredictSummary cmd_predict(const PipelineConfig& config, const WarningSink& warn) {
  config.validate();
  DeltaCache cache(config);
  std::vector<std::string> all_projects;
  for (const auto& entry : fs::directory_iterator(config.dataset_root)) {
    if (entry.is_directory()) all_projects.push_back(entry.path().filename().string());
  }
  std::sort(all_projects.begin(), all_projects.end());

  PredictSummary summary;
  for (const auto& project : config.projects) {
    const auto& versions = cache.versions(project.name);
    for (const auto& version : evaluated_versions(config, project)) {
      const auto index = static_cast<std::size_t>(
          std::find(versions.begin(), versions.end(), version) - versions.begin());

      FeatureDataset train;
      for (const auto& other : all_projects) {
        if (other == project.name) continue;
        for (std::size_t v = 0; v < cache.versions(other).size(); ++v) {
          append(train, cache.deltas(other, v));
        }
      }
      const std::size_t own_start = train.samples.size();
      for (std::size_t v = 0; v < index; ++v) append(train, cache.deltas(project.name, v));

      // Temporal hygiene: the project's own rows must come from strictly
      // earlier versions.
      const std::set<std::string> earlier(versions.begin(),
                                          versions.begin() + static_cast<std::ptrdiff_t>(index));
      for (std::size_t s = own_start; s < train.samples.size(); ++s) {
        const auto& vid = train.samples[s].version_id;
        if (!earlier.contains(vid)) {
          throw LeakageError("training data for " + project.name + "/" + version +
                             " contains a row labelled with version '" + vid + "'");
        }
      }

      const auto& target = cache.deltas(project.name, index);
      if (train.count(Label::kBuggy) < 2 || train.count(Label::kClean) == 0) {
        ++summary.skipped;
        if (warn) {
          warn("skipping " + project.name + "/" + version +
               ": not enough labelled history to train a model (" +
               std::to_string(train.count(Label::kBuggy)) + " buggy samples)");
        }
        continue;
      }
      SmoteParams smote = config.smote;
      smote.seed = derive_seed(config.seed, cell_tag("smote", project.name, version));
      const auto balanced = rebalance(train, smote);
      const auto model = train_classifier(balanced, config.lambda, config.training);

      const auto coverage = load_version_coverage(config, project.name, version);
      const auto fp = predict_fault_proneness(model, target, coverage.unit_ids());
      const auto out_dir = output_version_dir(config, project.name, version);
      {
        auto out = open_output(out_dir / "scores.csv");
        write_fault_proneness(out, coverage.unit_ids(), fp);
      }
      {
        auto out = open_output(out_dir / "model.json");
        write_model_json(out, model);
      }
      std::set<std::string> buggy;
      for (const auto& s : target.samples) {
        if (s.label == Label::kBuggy) buggy.insert(s.unit_id);
      }
      if (!buggy.empty() &&
          bug_hit(fp, coverage.unit_ids(), buggy, config.bug_hit_threshold)) {
        ++summary.bug_hits;
      }
      ++summary.written;
    }
  }
  return summary;
}

PrioritizeSummary cmd_prioritize(const PipelineConfig& config) {
  config.validate();
  PrioritizeSummary summary;
  for (const auto& project : config.projects) {
    for (const auto& version : evaluated_versions(config, project)) {
      const auto coverage = load_version_coverage(config, project.name, version);
      const auto out_dir = output_version_dir(config, project.name, version);
      std::optional<FaultPronenessVector> fp;
      for (const auto& spec : config.strategies) {
        if (spec.uses_fault_proneness() && !fp) {
          const auto path = out_dir / "scores.csv";
          if (!fs::exists(path)) {
            throw MissingScoresError("strategy '" + spec.label + "' needs " +
                                     path.string() +
                                     "; run `tcprio predict` first");
          }
          fp = load_fault_proneness_file(path.string(), coverage.unit_ids());
        }
        const FaultPronenessVector* weights =
            spec.uses_fault_proneness() ? &*fp : nullptr;
        StrategyConfig sc = spec.strategy;
        if (sc.tie_break == TieBreak::kRandom) {
          sc.seed = derive_seed(config.seed,
                                cell_tag("tie:" + spec.label, project.name, version));
        }
        const std::string base = base_name(spec.name);
        std::optional<PrioritizedOrder> order;
        if (base == "random") {
          order = prioritize_random(
              coverage.n_tests(),
              derive_seed(config.seed, cell_tag("random:" + spec.label, project.name,
                                                version)));
        } else if (base == "total") {
          order = prioritize_total(coverage, weights, sc);
        } else if (base == "additional") {
          order = prioritize_additional(coverage, weights, sc);
        } else {
          ClusteringConfig cc;
          cc.k = config.k;
          cc.threshold = config.threshold;
          cc.internal_mode = spec.internal_mode;
          cc.fp_batch_sort = spec.fp_batch_sort;
          cc.strategy = sc;
          order = prioritize_clustering(coverage, weights, cc);
        }
        auto out = open_output(out_dir / ("order_" + spec.label + ".csv"));
        write_order_csv(out, *order, coverage.test_ids());
        ++summary.written;
      }
    }
  }
  return summary;
}

EvaluationReport cmd_evaluate(const PipelineConfig& config) {
  config.validate();
  std::vector<CellResult> cells;
  std::vector<std::string> labels;
  for (const auto& s : config.strategies) labels.push_back(s.label);
  for (const auto& project : config.projects) {
    for (const auto& version : evaluated_versions(config, project)) {
      const auto coverage = load_version_coverage(config, project.name, version);
      const auto outcome = load_outcome_file(
          (version_dir(config, project.name, version) / "outcome.json").string());
      const auto out_dir = output_version_dir(config, project.name, version);
      for (const auto& label : labels) {
        const auto path = out_dir / ("order_" + label + ".csv");
        std::ifstream in(path, std::ios::binary);
        if (!in) {
          throw MissingCellError("missing order file '" + path.string() +
                                 "'; run `tcprio prioritize` first");
        }
        const auto order = load_order_csv(in, coverage.test_ids(), label);
        cells.push_back({project.name, version, label,
                         first_fail(order, coverage.test_ids(), outcome),
                         apfd(order, coverage.test_ids(), outcome)});
      }
    }
  }
  auto report = aggregate_report(cells, labels);
  {
    auto out = open_output(config.output_dir / "report.csv");
    write_summary_csv(out, report);
  }
  {
    auto out = open_output(config.output_dir / "pairwise.csv");
    write_pairwise_csv(out, report);
  }
  {
    auto out = open_output(config.output_dir / "cells.csv");
    write_cells_csv(out, report);
  }
  return report;
}

}  // namespace tcprio
