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

#include "tcprio/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "json.hpp"
#include "tcprio/errors.hpp"

namespace tcprio {

namespace {

// rank_of[test index] = 0-based position in the order.
std::vector<std::size_t> positions(const PrioritizedOrder& order,
                                   std::span<const std::string> test_ids) {
  if (order.size() != test_ids.size()) {
    throw DimensionMismatchError("order has " + std::to_string(order.size()) +
                                 " tests, id list has " +
                                 std::to_string(test_ids.size()));
  }
  std::vector<std::size_t> rank_of(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank_of[order[r]] = r;
  return rank_of;
}

class TestLookup {
 public:
  explicit TestLookup(std::span<const std::string> ids) {
    for (std::size_t i = 0; i < ids.size(); ++i) index_.emplace(ids[i], i);
  }
  std::size_t operator()(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
      throw UnknownTestError("test '" + id + "' is not part of the order");
    }
    return it->second;
  }

 private:
  std::unordered_map<std::string, std::size_t> index_;
};

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace

void VersionOutcome::validate() const {
  if (failing_tests.empty()) {
    throw DomainError("version '" + version_id + "' has no failing tests");
  }
  std::set<std::string> detecting;
  for (const auto& [fault, tests] : fault_map) {
    if (tests.empty()) {
      throw UndetectedFaultError("fault '" + fault + "' of version '" +
                                 version_id + "' has no detecting test");
    }
    detecting.insert(tests.begin(), tests.end());
  }
  if (detecting != failing_tests) {
    throw DomainError("version '" + version_id +
                      "': failing_tests differs from the union of fault_map");
  }
}

VersionOutcome load_outcome_json(std::istream& in) {
  VersionOutcome out;
  try {
    const auto doc = nlohmann::json::parse(in);
    out.version_id = doc.at("version_id").get<std::string>();
    for (const auto& t : doc.at("failing_tests")) {
      out.failing_tests.insert(t.get<std::string>());
    }
    if (doc.contains("fault_map")) {
      for (const auto& [fault, tests] : doc.at("fault_map").items()) {
        auto& set = out.fault_map[fault];
        for (const auto& t : tests) set.insert(t.get<std::string>());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("outcome json: ") + e.what());
  }
  // A version without a fault map carries a single fault found by every
  // failing test.
  if (out.fault_map.empty()) out.fault_map["fault"] = out.failing_tests;
  out.validate();
  return out;
}

VersionOutcome load_outcome_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return load_outcome_json(in);
}

double first_fail(const PrioritizedOrder& order,
                  std::span<const std::string> test_ids,
                  const VersionOutcome& outcome) {
  const auto rank_of = positions(order, test_ids);
  const TestLookup lookup(test_ids);
  if (outcome.failing_tests.empty()) {
    throw DomainError("version '" + outcome.version_id + "' has no failing tests");
  }
  std::size_t earliest = SIZE_MAX;
  for (const auto& id : outcome.failing_tests) {
    earliest = std::min(earliest, rank_of[lookup(id)]);
  }
  return 100.0 * static_cast<double>(earliest + 1) /
         static_cast<double>(order.size());
}

double apfd(const PrioritizedOrder& order, std::span<const std::string> test_ids,
            const VersionOutcome& outcome) {
  const auto rank_of = positions(order, test_ids);
  const TestLookup lookup(test_ids);
  if (outcome.fault_map.empty()) {
    throw UndetectedFaultError("version '" + outcome.version_id + "' has no faults");
  }
  double rank_sum = 0.0;
  for (const auto& [fault, tests] : outcome.fault_map) {
    if (tests.empty()) {
      throw UndetectedFaultError("fault '" + fault + "' is never detected");
    }
    std::size_t first = SIZE_MAX;
    for (const auto& id : tests) first = std::min(first, rank_of[lookup(id)]);
    rank_sum += static_cast<double>(first + 1);
  }
  const double n = static_cast<double>(order.size());
  const double f = static_cast<double>(outcome.fault_map.size());
  return 1.0 - rank_sum / (n * f) + 1.0 / (2.0 * n);
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a,
                                    std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionMismatchError("paired samples differ in length");
  }
  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) diffs.push_back(d);
  }
  const std::size_t n = diffs.size();
  if (n < kWilcoxonMinPairs) {
    throw InsufficientPairsError("only " + std::to_string(n) +
                                 " non-zero paired differences");
  }

  // Doubled average ranks of |d| keep tied ranks integral.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    return std::abs(diffs[x]) < std::abs(diffs[y]);
  });
  std::vector<std::uint64_t> rank2(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(diffs[idx[j + 1]]) == std::abs(diffs[idx[i]])) ++j;
    for (std::size_t t = i; t <= j; ++t) rank2[idx[t]] = (i + 1) + (j + 1);
    const double ties = static_cast<double>(j - i + 1);
    tie_term += ties * ties * ties - ties;
    i = j + 1;
  }
  std::uint64_t w_plus2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (diffs[i] > 0) w_plus2 += rank2[i];
  }
  const std::uint64_t total2 = n * (n + 1);

  WilcoxonResult out;
  out.n_nonzero = n;
  const double w_plus = static_cast<double>(w_plus2) / 2.0;
  out.statistic = std::min(w_plus, static_cast<double>(total2 - w_plus2) / 2.0);

  if (n <= kWilcoxonExactLimit) {
    // counts[s] = number of sign assignments whose doubled W+ equals s.
    std::vector<std::uint64_t> counts(total2 + 1, 0);
    counts[0] = 1;
    std::uint64_t reach = 0;
    for (std::uint64_t r : rank2) {
      for (std::uint64_t s = reach + 1; s-- > 0;) counts[s + r] += counts[s];
      reach += r;
    }
    std::uint64_t below = 0, above = 0;
    for (std::uint64_t s = 0; s <= total2; ++s) {
      if (s <= w_plus2) below += counts[s];
      if (s >= w_plus2) above += counts[s];
    }
    const double tail = static_cast<double>(std::min(below, above));
    out.p_value = std::min(1.0, 2.0 * tail / std::ldexp(1.0, static_cast<int>(n)));
    out.exact = true;
    return out;
  }

  const double nn = static_cast<double>(n);
  const double mu = nn * (nn + 1.0) / 4.0;
  const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  const double dev = std::max(0.0, std::abs(w_plus - mu) - 0.5);
  const double z = var > 0.0 ? dev / std::sqrt(var) : 0.0;
  out.p_value = std::clamp(std::erfc(z / std::sqrt(2.0)),
                           std::numeric_limits<double>::min(), 1.0);
  return out;
}

EvaluationReport aggregate_report(std::span<const CellResult> cells,
                                  std::span<const std::string> strategies) {
  if (strategies.empty()) throw ConfigError("no strategies to aggregate");
  // (project, version) -> strategy -> cell
  std::map<std::pair<std::string, std::string>,
           std::map<std::string, const CellResult*>>
      grid;
  for (const auto& cell : cells) {
    auto& row = grid[{cell.project, cell.version}];
    if (!row.emplace(cell.strategy, &cell).second) {
      throw DomainError("duplicate result for " + cell.project + "/" +
                        cell.version + "/" + cell.strategy);
    }
  }
  for (const auto& [key, row] : grid) {
    for (const auto& s : strategies) {
      if (!row.contains(s)) {
        throw MissingCellError("no result for strategy '" + s + "' on " +
                               key.first + "/" + key.second);
      }
    }
  }

  EvaluationReport report;
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> projects;
  for (const auto& [key, row] : grid) {
    projects[key.first].push_back(key);
    for (const auto& s : strategies) report.cells.push_back(*row.at(s));
  }

  auto summarize = [&](const std::string& label,
                       std::span<const std::pair<std::string, std::string>> keys) {
    for (const auto& s : strategies) {
      std::vector<double> ff, ap;
      for (const auto& key : keys) {
        ff.push_back(grid.at(key).at(s)->first_fail);
        ap.push_back(grid.at(key).at(s)->apfd);
      }
      report.summaries.push_back({label, keys.size(), s, mean(ff), mean(ap)});
    }
  };
  std::vector<std::pair<std::string, std::string>> all_keys;
  for (const auto& [project, keys] : projects) {
    summarize(project, keys);
    all_keys.insert(all_keys.end(), keys.begin(), keys.end());
  }
  summarize("Overall", all_keys);

  std::map<std::string, std::vector<double>> pooled;
  for (const auto& s : strategies) {
    auto& v = pooled[s];
    for (const auto& key : all_keys) v.push_back(grid.at(key).at(s)->first_fail);
    report.per_strategy_mean[s] = mean(v);
  }
  for (std::size_t i = 0; i < strategies.size(); ++i) {
    for (std::size_t j = i + 1; j < strategies.size(); ++j) {
      PairwiseTest test{strategies[i], strategies[j], std::nullopt, 0.0};
      const auto& a = pooled[strategies[i]];
      const auto& b = pooled[strategies[j]];
      test.mean_difference = mean(a) - mean(b);
      try {
        test.result = wilcoxon_signed_rank(a, b);
      } catch (const InsufficientPairsError&) {
      }
      report.pairwise_tests.push_back(std::move(test));
    }
  }
  return report;
}

void write_summary_csv(std::ostream& out, const EvaluationReport& report) {
  out << "project,versions,strategy,mean_first_fail\n";
  for (const auto& s : report.summaries) {
    out << s.project << ',' << s.versions << ',' << s.strategy << ','
        << format_double(s.mean_first_fail) << '\n';
  }
}

void write_pairwise_csv(std::ostream& out, const EvaluationReport& report) {
  out << "strategy_a,strategy_b,statistic,p_value\n";
  for (const auto& t : report.pairwise_tests) {
    out << t.strategy_a << ',' << t.strategy_b << ',';
    if (t.result) {
      out << format_double(t.result->statistic) << ','
          << format_double(t.result->p_value) << '\n';
    } else {
      out << "degenerate,degenerate\n";
    }
  }
}

void write_cells_csv(std::ostream& out, const EvaluationReport& report) {
  out << "project,version,strategy,first_fail,apfd\n";
  for (const auto& c : report.cells) {
    out << c.project << ',' << c.version << ',' << c.strategy << ','
        << format_double(c.first_fail) << ',' << format_double(c.apfd) << '\n';
  }
}

}  // namespace tcprio
