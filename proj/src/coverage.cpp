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

#include "tcprio/coverage.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "json.hpp"
#include "tcprio/csv.hpp"
#include "tcprio/errors.hpp"

namespace tcprio {

namespace {

std::unordered_map<std::string, std::size_t> index_ids(
    const std::vector<std::string>& ids, const char* what) {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!index.emplace(ids[i], i).second) {
      throw DuplicateIdError(std::string("duplicate ") + what + " id '" +
                             ids[i] + "'");
    }
  }
  return index;
}

void check_test_index(const CoverageMatrix& matrix, std::size_t test) {
  if (test >= matrix.n_tests()) {
    throw IndexError("test index " + std::to_string(test) +
                     " out of range for " + std::to_string(matrix.n_tests()) +
                     " tests");
  }
}

CoverageMatrix load_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!csv::next_line(in, line, line_no)) {
    throw ParseError("coverage csv: empty input");
  }
  auto header = csv::split_line(line);
  if (header.size() < 2) {
    throw ParseError("coverage csv: header needs test_id and at least one unit");
  }
  std::vector<std::string> unit_ids(header.begin() + 1, header.end());
  const std::size_t width = header.size();

  std::vector<std::string> test_ids;
  std::vector<double> entries;
  while (csv::next_line(in, line, line_no)) {
    auto fields = csv::split_line(line);
    const std::string where = "coverage csv line " + std::to_string(line_no);
    if (fields.size() != width) {
      throw ParseError(where + ": expected " + std::to_string(width) +
                       " fields, got " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw ParseError(where + ": empty test id");
    test_ids.push_back(std::move(fields[0]));
    for (std::size_t c = 1; c < width; ++c) {
      entries.push_back(csv::parse_double(fields[c], where));
    }
  }
  return CoverageMatrix(std::move(test_ids), std::move(unit_ids),
                        std::move(entries));
}

CoverageMatrix load_json(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
    auto test_ids = doc.at("test_ids").get<std::vector<std::string>>();
    auto unit_ids = doc.at("unit_ids").get<std::vector<std::string>>();
    const auto& rows = doc.at("rows");
    if (!rows.is_array() || rows.size() != test_ids.size()) {
      throw ParseError("coverage json: rows must have one array per test id");
    }
    std::vector<double> entries;
    entries.reserve(test_ids.size() * unit_ids.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto& row = rows[r];
      if (!row.is_array() || row.size() != unit_ids.size()) {
        throw ParseError("coverage json: row " + std::to_string(r) +
                         " does not have one value per unit id");
      }
      for (const auto& v : row) {
        if (!v.is_number()) {
          throw ParseError("coverage json: non-numeric entry in row " +
                           std::to_string(r));
        }
        entries.push_back(v.get<double>());
      }
    }
    return CoverageMatrix(std::move(test_ids), std::move(unit_ids),
                          std::move(entries));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("coverage json: ") + e.what());
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return in;
}

}  // namespace

CoverageMatrix::CoverageMatrix(std::vector<std::string> test_ids,
                               std::vector<std::string> unit_ids,
                               std::vector<double> entries)
    : test_ids_(std::move(test_ids)),
      unit_ids_(std::move(unit_ids)),
      entries_(std::move(entries)) {
  if (test_ids_.empty() || unit_ids_.empty()) {
    throw DomainError("coverage matrix needs at least one test and one unit");
  }
  if (entries_.size() != test_ids_.size() * unit_ids_.size()) {
    throw DimensionMismatchError("coverage matrix has " +
                                 std::to_string(entries_.size()) +
                                 " entries, expected " +
                                 std::to_string(test_ids_.size()) + " x " +
                                 std::to_string(unit_ids_.size()));
  }
  test_index_ = index_ids(test_ids_, "test");
  unit_index_ = index_ids(unit_ids_, "unit");

  row_start_.reserve(n_tests() + 1);
  row_start_.push_back(0);
  for (std::size_t t = 0; t < n_tests(); ++t) {
    for (std::size_t u = 0; u < n_units(); ++u) {
      const double e = entries_[t * n_units() + u];
      if (!(e >= 0.0 && e <= 1.0)) {
        throw DomainError("coverage of test '" + test_ids_[t] + "' on unit '" +
                          unit_ids_[u] + "' is " + format_double(e) +
                          ", outside [0,1]");
      }
      if (e != 0.0) nonzero_.push_back(static_cast<std::uint32_t>(u));
    }
    row_start_.push_back(nonzero_.size());
  }
}

std::optional<std::size_t> CoverageMatrix::find_test(
    const std::string& id) const {
  auto it = test_index_.find(id);
  if (it == test_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> CoverageMatrix::find_unit(
    const std::string& id) const {
  auto it = unit_index_.find(id);
  if (it == unit_index_.end()) return std::nullopt;
  return it->second;
}

FaultPronenessVector::FaultPronenessVector(std::vector<double> scores)
    : scores_(std::move(scores)) {
  for (std::size_t j = 0; j < scores_.size(); ++j) {
    if (!(scores_[j] >= 0.0 && scores_[j] <= 1.0)) {
      throw DomainError("fault-proneness score " + format_double(scores_[j]) +
                        " at unit " + std::to_string(j) + " outside [0,1]");
    }
  }
}

bool is_permutation_of_range(std::span<const std::size_t> values) {
  std::vector<bool> seen(values.size(), false);
  for (std::size_t v : values) {
    if (v >= values.size() || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

PrioritizedOrder::PrioritizedOrder(std::vector<std::size_t> permutation,
                                   std::string strategy_name,
                                   std::optional<std::uint64_t> seed)
    : permutation_(std::move(permutation)),
      strategy_name_(std::move(strategy_name)),
      seed_(seed) {
  if (!is_permutation_of_range(permutation_)) {
    throw DomainError("order produced by '" + strategy_name_ +
                      "' is not a permutation of the test indices");
  }
}

double total_coverage(const CoverageMatrix& matrix, std::size_t test) {
  check_test_index(matrix, test);
  double sum = 0.0;
  for (std::uint32_t u : matrix.nonzero_units(test)) sum += matrix.at(test, u);
  return sum;
}

double fp_coverage(const CoverageMatrix& matrix, const FaultPronenessVector& fp,
                   std::size_t test) {
  if (fp.size() != matrix.n_units()) {
    throw DimensionMismatchError(
        "fault-proneness vector has " + std::to_string(fp.size()) +
        " scores for " + std::to_string(matrix.n_units()) + " units");
  }
  check_test_index(matrix, test);
  double sum = 0.0;
  for (std::uint32_t u : matrix.nonzero_units(test)) {
    sum += matrix.at(test, u) * fp[u];
  }
  return sum;
}

CoverageMatrix load_coverage_matrix(std::istream& in, CoverageFormat format) {
  return format == CoverageFormat::kCsv ? load_csv(in) : load_json(in);
}

CoverageMatrix load_coverage_matrix_file(const std::string& path) {
  auto in = open_input(path);
  const bool json = path.size() >= 5 && path.ends_with(".json");
  return load_coverage_matrix(in, json ? CoverageFormat::kJson
                                       : CoverageFormat::kCsv);
}

void write_coverage_csv(std::ostream& out, const CoverageMatrix& matrix) {
  out << "test_id";
  for (const auto& u : matrix.unit_ids()) out << ',' << u;
  out << '\n';
  for (std::size_t t = 0; t < matrix.n_tests(); ++t) {
    out << matrix.test_ids()[t];
    for (double v : matrix.row(t)) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_coverage_json(std::ostream& out, const CoverageMatrix& matrix) {
  nlohmann::json doc;
  doc["test_ids"] = matrix.test_ids();
  doc["unit_ids"] = matrix.unit_ids();
  auto& rows = doc["rows"] = nlohmann::json::array();
  for (std::size_t t = 0; t < matrix.n_tests(); ++t) {
    auto row = matrix.row(t);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  out << doc.dump() << '\n';
}

FaultPronenessVector load_fault_proneness(
    std::istream& in, std::span<const std::string> unit_ids) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < unit_ids.size(); ++j) index.emplace(unit_ids[j], j);

  std::vector<double> scores(unit_ids.size(), 0.0);
  std::vector<bool> filled(unit_ids.size(), false);
  std::string line;
  std::size_t line_no = 0;
  if (!csv::next_line(in, line, line_no)) {
    throw ParseError("fault-proneness csv: empty input");
  }
  auto header = csv::split_line(line);
  if (header.size() != 2 || header[0] != "unit_id" || header[1] != "score") {
    throw ParseError("fault-proneness csv: header must be 'unit_id,score'");
  }
  while (csv::next_line(in, line, line_no)) {
    const auto fields = csv::split_line(line);
    const std::string where = "fault-proneness csv line " + std::to_string(line_no);
    if (fields.size() != 2) throw ParseError(where + ": expected 2 fields");
    auto it = index.find(fields[0]);
    if (it == index.end()) {
      throw UnknownUnitError(where + ": unit '" + fields[0] +
                             "' is not in the coverage matrix");
    }
    if (filled[it->second]) {
      throw DuplicateIdError(where + ": unit '" + fields[0] + "' repeated");
    }
    scores[it->second] = csv::parse_double(fields[1], where);
    filled[it->second] = true;
  }
  for (std::size_t j = 0; j < unit_ids.size(); ++j) {
    if (!filled[j]) {
      throw UnknownUnitError("fault-proneness csv: no score for unit '" +
                             unit_ids[j] + "'");
    }
  }
  return FaultPronenessVector(std::move(scores));
}

FaultPronenessVector load_fault_proneness_file(
    const std::string& path, std::span<const std::string> unit_ids) {
  auto in = open_input(path);
  return load_fault_proneness(in, unit_ids);
}

void write_fault_proneness(std::ostream& out,
                           std::span<const std::string> unit_ids,
                           const FaultPronenessVector& fp) {
  if (unit_ids.size() != fp.size()) {
    throw DimensionMismatchError("unit id count does not match score count");
  }
  out << "unit_id,score\n";
  for (std::size_t j = 0; j < fp.size(); ++j) {
    out << unit_ids[j] << ',' << format_double(fp[j]) << '\n';
  }
}

void write_order_csv(std::ostream& out, const PrioritizedOrder& order,
                     std::span<const std::string> test_ids) {
  if (order.size() != test_ids.size()) {
    throw DimensionMismatchError("order length does not match test id count");
  }
  out << "rank,test_id\n";
  for (std::size_t r = 0; r < order.size(); ++r) {
    out << (r + 1) << ',' << test_ids[order[r]] << '\n';
  }
}

PrioritizedOrder load_order_csv(std::istream& in,
                                std::span<const std::string> test_ids,
                                std::string strategy_name) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < test_ids.size(); ++i) index.emplace(test_ids[i], i);

  std::string line;
  std::size_t line_no = 0;
  if (!csv::next_line(in, line, line_no) || line != "rank,test_id") {
    throw ParseError("order csv: header must be 'rank,test_id'");
  }
  std::vector<std::size_t> permutation;
  while (csv::next_line(in, line, line_no)) {
    const auto fields = csv::split_line(line);
    const std::string where = "order csv line " + std::to_string(line_no);
    if (fields.size() != 2) throw ParseError(where + ": expected 2 fields");
    if (fields[0] != std::to_string(permutation.size() + 1)) {
      throw ParseError(where + ": ranks must be consecutive from 1");
    }
    auto it = index.find(fields[1]);
    if (it == index.end()) {
      throw UnknownTestError(where + ": unknown test '" + fields[1] + "'");
    }
    permutation.push_back(it->second);
  }
  if (permutation.size() != test_ids.size()) {
    throw ParseError("order csv: lists " + std::to_string(permutation.size()) +
                     " tests, expected " + std::to_string(test_ids.size()));
  }
  return PrioritizedOrder(std::move(permutation), std::move(strategy_name));
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

}  // namespace tcprio
