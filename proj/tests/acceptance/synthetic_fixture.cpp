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

#include "synthetic_fixture.hpp"

#include <algorithm>
#include <cmath>

#include "tcprio/random.hpp"

namespace tcprio::acceptance {
namespace {

double gaussian(Rng& rng) {
  const double u1 = 1.0 - rng.uniform01(), u2 = rng.uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

struct UnitState {
  double size = 0.0;
  bool planted = false;
};

FeatureDataset next_features(Rng& rng, std::vector<UnitState>& units,
                             const std::vector<std::string>& ids,
                             const std::string& version, bool labelled) {
  FeatureDataset d;
  d.feature_names = {"size", "churn", "complexity"};
  for (std::size_t j = 0; j < units.size(); ++j) {
    auto& u = units[j];
    const double churn =
        std::max(0.0, u.planted ? 6.0 + 2.0 * gaussian(rng) : 1.0 + gaussian(rng));
    u.size += churn;
    const double complexity = u.size / 25.0 + (u.planted ? 3.0 : 0.0) + 2.0 * gaussian(rng);
    Label label = Label::kClean;
    if (labelled && rng.uniform01() < (u.planted ? 0.3 : 0.004)) label = Label::kBuggy;
    d.samples.push_back({ids[j], version, {u.size, churn, complexity}, label});
  }
  return d;
}

}  // namespace

SyntheticProject make_synthetic_project(std::uint64_t seed, const SyntheticShape& shape) {
  Rng rng(derive_seed(seed, "synthetic"));
  const std::size_t modules = shape.units / shape.unit_per_module;
  const std::size_t peripheral = modules - shape.core_modules;

  SyntheticProject project;
  for (std::size_t j = 0; j < shape.units; ++j) project.unit_ids.push_back("u" + std::to_string(j));
  std::vector<UnitState> units(shape.units);
  for (auto& u : units) u.size = 100.0 + 300.0 * rng.uniform01();
  std::vector<std::size_t> planted_of_module(modules, shape.units);
  for (std::size_t m = shape.core_modules; m < modules; ++m) {
    const std::size_t j = m * shape.unit_per_module + rng.below(shape.unit_per_module);
    planted_of_module[m] = j;
    units[j].planted = true;
    project.planted_units.insert(project.unit_ids[j]);
  }

  // Each integration family exercises a fixed slice of the core modules.
  std::vector<std::vector<std::size_t>> family_units(shape.integration_families);
  for (auto& slice : family_units) {
    std::vector<std::size_t> core(shape.core_modules);
    for (std::size_t m = 0; m < core.size(); ++m) core[m] = m;
    rng.shuffle(core);
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t k = 0; k < shape.unit_per_module; ++k) {
        if (rng.uniform01() < 0.8) slice.push_back(core[c] * shape.unit_per_module + k);
      }
    }
  }
  const std::size_t integration = shape.integration_families * shape.integration_per_family;

  for (std::size_t h = 0; h < shape.history_versions; ++h) {
    project.history.push_back(
        next_features(rng, units, project.unit_ids, "h" + std::to_string(h), true));
  }

  for (std::size_t v = 0; v < shape.versions; ++v) {
    const std::string version = std::to_string(v + 1);
    std::vector<std::string> test_ids;
    std::vector<double> cells(shape.tests * shape.units, 0.0);
    std::vector<std::size_t> home(shape.tests, modules);
    for (std::size_t t = 0; t < shape.tests; ++t) {
      double* row = &cells[t * shape.units];
      if (t < integration) {
        test_ids.push_back("it" + std::to_string(t));
        for (std::size_t j : family_units[t / shape.integration_per_family]) {
          if (rng.uniform01() < 0.95) row[j] = 1.0;
        }
        for (std::size_t j = shape.core_modules * shape.unit_per_module; j < shape.units; ++j) {
          if (rng.uniform01() < 0.003) row[j] = 1.0;
        }
      } else {
        test_ids.push_back("ut" + std::to_string(t));
        const std::size_t m = shape.core_modules + (t - integration) % peripheral;
        home[t] = m;
        for (std::size_t k = 0; k < shape.unit_per_module; ++k) {
          if (rng.uniform01() < 0.4) {
            row[m * shape.unit_per_module + k] = rng.uniform01() < 0.3 ? 0.5 : 1.0;
          }
        }
      }
    }

    // One fault per version, usually in a planted unit.
    const std::size_t m = shape.core_modules + rng.below(peripheral);
    std::size_t faulty = planted_of_module[m];
    if (rng.uniform01() >= 0.8) {
      do {
        faulty = m * shape.unit_per_module + rng.below(shape.unit_per_module);
      } while (faulty == planted_of_module[m]);
    }
    std::vector<std::size_t> covering;
    for (std::size_t t = 0; t < shape.tests; ++t) {
      if (cells[t * shape.units + faulty] > 0.0) covering.push_back(t);
    }
    if (covering.empty()) {
      for (std::size_t t = 0; t < shape.tests; ++t) {
        if (home[t] == m) {
          cells[t * shape.units + faulty] = 1.0;
          covering.push_back(t);
          break;
        }
      }
    }
    std::set<std::string> failing;
    for (std::size_t t : covering) {
      if (rng.uniform01() < 0.8) failing.insert(test_ids[t]);
    }
    if (failing.empty()) failing.insert(test_ids[covering.front()]);

    auto features = next_features(rng, units, project.unit_ids, version, false);
    features.samples[faulty].label = Label::kBuggy;
    project.versions.push_back({CoverageMatrix(test_ids, project.unit_ids, cells),
                                std::move(features), std::move(failing),
                                project.unit_ids[faulty]});
  }
  return project;
}

}  // namespace tcprio::acceptance
