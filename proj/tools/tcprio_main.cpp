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

// Command-line driver: predict, prioritize, evaluate, or all three in sequence.
//
// Exit codes: 0 success, 2 configuration error, 3 data error,
// 4 internal assertion (for example training-data leakage).

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tcprio/errors.hpp"
#include "tcprio/pipeline.hpp"

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kDataError = 3, kInternalError = 4 };

struct Overrides {
  std::string config_path;
  std::vector<std::string> projects;
  std::string strategies;
  std::optional<std::uint64_t> seed;
  std::string out;
};

tcprio::PipelineConfig resolve(const Overrides& o) {
  auto config = tcprio::load_pipeline_config(o.config_path);
  if (!o.projects.empty()) {
    std::vector<tcprio::ProjectSpec> selected;
    for (const auto& name : o.projects) {
      auto it = std::find_if(config.projects.begin(), config.projects.end(),
                             [&](const auto& p) { return p.name == name; });
      selected.push_back(it != config.projects.end()
                             ? *it
                             : tcprio::ProjectSpec{name, std::nullopt});
    }
    config.projects = std::move(selected);
  }
  if (!o.strategies.empty()) {
    // Items are separated by ';' so parameters may use ','.
    config.strategies.clear();
    std::stringstream ss(o.strategies);
    std::string item;
    const char sep = o.strategies.find(';') != std::string::npos ? ';' : ',';
    while (std::getline(ss, item, sep)) {
      if (!item.empty()) config.strategies.push_back(tcprio::parse_strategy_spec(item));
    }
  }
  if (o.seed) config.seed = *o.seed;
  if (!o.out.empty()) config.output_dir = o.out;
  config.validate();
  return config;
}

void print_report(const tcprio::EvaluationReport& report) {
  std::cout << "mean first-fail over all versions:\n";
  for (const auto& [strategy, mean] : report.per_strategy_mean) {
    std::cout << "  " << strategy << ": " << mean << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regression test prioritization with clustering and fault-proneness"};
  app.require_subcommand(1);
  Overrides o;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config_path, "Pipeline JSON config")->required();
    cmd->add_option("--project", o.projects, "Restrict to these projects");
    cmd->add_option("--strategies", o.strategies,
                    "Strategy list, e.g. total,clustering+fp");
    cmd->add_option("--seed", o.seed, "Override the global seed");
    cmd->add_option("--out", o.out, "Override the output directory");
  };
  auto* predict = app.add_subcommand("predict", "Write per-version fault-proneness scores");
  auto* prioritize = app.add_subcommand("prioritize", "Write per-version test orders");
  auto* evaluate = app.add_subcommand("evaluate", "Score orders and write reports");
  auto* pipeline = app.add_subcommand("pipeline", "predict, prioritize, then evaluate");
  for (auto* cmd : {predict, prioritize, evaluate, pipeline}) add_common(cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  auto warn = [](const std::string& msg) { std::cerr << "warning: " << msg << "\n"; };
  try {
    const auto config = resolve(o);
    if (*predict || *pipeline) {
      const auto s = tcprio::cmd_predict(config, warn);
      std::cout << "predict: " << s.written << " score files, " << s.skipped
                << " skipped, " << s.bug_hits << " versions with a predicted bug\n";
    }
    if (*prioritize || *pipeline) {
      const auto s = tcprio::cmd_prioritize(config);
      std::cout << "prioritize: " << s.written << " order files\n";
    }
    if (*evaluate || *pipeline) {
      print_report(tcprio::cmd_evaluate(config));
    }
  } catch (const tcprio::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const tcprio::InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternalError;
  } catch (const tcprio::Error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  }
  return kOk;
}
