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

// Scoring of prioritized orders (first-fail, APFD), aggregation over versions
// and projects, and the Wilcoxon signed-rank test used to compare strategies.

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tcprio/coverage.hpp"

namespace tcprio {

struct VersionOutcome {
  std::string version_id;
  std::set<std::string> failing_tests;
  std::map<std::string, std::set<std::string>> fault_map;

  // Throws DomainError unless failing_tests is non-empty and equals the union
  // of the fault_map values.
  void validate() const;
};

VersionOutcome load_outcome_json(std::istream& in);
VersionOutcome load_outcome_file(const std::string& path);

// 100 * (1-based rank of the first failing test) / n.
double first_fail(const PrioritizedOrder& order,
                  std::span<const std::string> test_ids,
                  const VersionOutcome& outcome);

// 1 - sum(r_i) / (n f) + 1 / (2n), r_i the rank of the first test that
// detects fault i.
double apfd(const PrioritizedOrder& order, std::span<const std::string> test_ids,
            const VersionOutcome& outcome);

struct WilcoxonResult {
  double statistic = 0.0;  // min(W+, W-)
  double p_value = 1.0;    // two-sided
  std::size_t n_nonzero = 0;
  bool exact = false;
};

// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences
// are dropped and tied magnitudes get average ranks. The null distribution is
// enumerated exactly up to 25 non-zero pairs; above that a normal
// approximation with tie and continuity correction is used.
// Throws InsufficientPairsError below 5 non-zero pairs.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a,
                                    std::span<const double> b);

inline constexpr std::size_t kWilcoxonExactLimit = 25;
inline constexpr std::size_t kWilcoxonMinPairs = 5;

struct CellResult {
  std::string project;
  std::string version;
  std::string strategy;
  double first_fail = 0.0;
  double apfd = 0.0;
};

struct ProjectSummary {
  std::string project;  // "Overall" for the pooled row
  std::size_t versions = 0;
  std::string strategy;
  double mean_first_fail = 0.0;
  double mean_apfd = 0.0;
};

struct PairwiseTest {
  std::string strategy_a;
  std::string strategy_b;
  std::optional<WilcoxonResult> result;  // empty when the pairing is degenerate
  double mean_difference = 0.0;          // mean first-fail a - b
};

struct EvaluationReport {
  std::vector<CellResult> cells;
  std::vector<ProjectSummary> summaries;  // per project, then "Overall"
  std::map<std::string, double> per_strategy_mean;
  std::vector<PairwiseTest> pairwise_tests;
};

// Per-project and overall unweighted means over versions (the overall row
// pools all versions), plus Wilcoxon tests over pooled per-version first-fail
// pairs for every strategy pair. Throws MissingCellError if any
// (project, version) lacks a strategy.
EvaluationReport aggregate_report(std::span<const CellResult> cells,
                                  std::span<const std::string> strategies);

// `project,versions,strategy,mean_first_fail`
void write_summary_csv(std::ostream& out, const EvaluationReport& report);
// `strategy_a,strategy_b,statistic,p_value`; degenerate pairings print the
// literal `degenerate` in both value columns.
void write_pairwise_csv(std::ostream& out, const EvaluationReport& report);
// `project,version,strategy,first_fail,apfd`
void write_cells_csv(std::ostream& out, const EvaluationReport& report);

}  // namespace tcprio
