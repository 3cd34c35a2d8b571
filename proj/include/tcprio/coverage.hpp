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

// Core data model: the test x unit coverage matrix, per-unit fault-proneness
// scores, prioritized orders, and the two coverage sums used everywhere else.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace tcprio {

enum class CoverageFormat { kCsv, kJson };

// Dense n_tests x n_units matrix of coverage fractions in [0,1]. Row i is the
// coverage vector of test i. Immutable after construction; each row also keeps
// the list of its non-zero columns so sums and distances can skip zeros.
class CoverageMatrix {
 public:
  // `entries` is row-major with test_ids.size() * unit_ids.size() values.
  // Throws DomainError, DuplicateIdError or DimensionMismatchError.
  CoverageMatrix(std::vector<std::string> test_ids,
                 std::vector<std::string> unit_ids,
                 std::vector<double> entries);

  std::size_t n_tests() const { return test_ids_.size(); }
  std::size_t n_units() const { return unit_ids_.size(); }

  double at(std::size_t test, std::size_t unit) const {
    return entries_[test * n_units() + unit];
  }
  std::span<const double> row(std::size_t test) const {
    return {entries_.data() + test * n_units(), n_units()};
  }
  // Columns with a non-zero entry in `test`, ascending.
  std::span<const std::uint32_t> nonzero_units(std::size_t test) const {
    return {nonzero_.data() + row_start_[test],
            row_start_[test + 1] - row_start_[test]};
  }

  const std::vector<std::string>& test_ids() const { return test_ids_; }
  const std::vector<std::string>& unit_ids() const { return unit_ids_; }
  std::optional<std::size_t> find_test(const std::string& id) const;
  std::optional<std::size_t> find_unit(const std::string& id) const;

  friend bool operator==(const CoverageMatrix& a, const CoverageMatrix& b) {
    return a.test_ids_ == b.test_ids_ && a.unit_ids_ == b.unit_ids_ &&
           a.entries_ == b.entries_;
  }

 private:
  std::vector<std::string> test_ids_;
  std::vector<std::string> unit_ids_;
  std::vector<double> entries_;
  std::vector<std::uint32_t> nonzero_;
  std::vector<std::size_t> row_start_;
  std::unordered_map<std::string, std::size_t> test_index_;
  std::unordered_map<std::string, std::size_t> unit_index_;
};

// Estimated probability that each unit contains a fault, in [0,1].
class FaultPronenessVector {
 public:
  explicit FaultPronenessVector(std::vector<double> scores);

  std::size_t size() const { return scores_.size(); }
  double operator[](std::size_t unit) const { return scores_[unit]; }
  std::span<const double> scores() const { return scores_; }

  friend bool operator==(const FaultPronenessVector&,
                         const FaultPronenessVector&) = default;

 private:
  std::vector<double> scores_;
};

// A permutation of test indices produced by some strategy.
class PrioritizedOrder {
 public:
  // Throws DomainError unless `permutation` is a bijection on {0..n-1}.
  PrioritizedOrder(std::vector<std::size_t> permutation,
                   std::string strategy_name,
                   std::optional<std::uint64_t> seed = std::nullopt);

  std::size_t size() const { return permutation_.size(); }
  std::size_t operator[](std::size_t rank) const { return permutation_[rank]; }
  const std::vector<std::size_t>& permutation() const { return permutation_; }
  const std::string& strategy_name() const { return strategy_name_; }
  std::optional<std::uint64_t> seed() const { return seed_; }

 private:
  std::vector<std::size_t> permutation_;
  std::string strategy_name_;
  std::optional<std::uint64_t> seed_;
};

bool is_permutation_of_range(std::span<const std::size_t> values);

// Sum of the coverage row of `test`. Throws IndexError.
double total_coverage(const CoverageMatrix& matrix, std::size_t test);

// Sum of the coverage row of `test` weighted by per-unit fault-proneness.
// Throws DimensionMismatchError or IndexError.
double fp_coverage(const CoverageMatrix& matrix, const FaultPronenessVector& fp,
                   std::size_t test);

CoverageMatrix load_coverage_matrix(std::istream& in, CoverageFormat format);
CoverageMatrix load_coverage_matrix_file(const std::string& path);
void write_coverage_csv(std::ostream& out, const CoverageMatrix& matrix);
void write_coverage_json(std::ostream& out, const CoverageMatrix& matrix);

// Reads `unit_id,score` rows and reorders them to match `unit_ids`. Every
// unit must appear exactly once and no unknown ids are allowed.
FaultPronenessVector load_fault_proneness(
    std::istream& in, std::span<const std::string> unit_ids);
FaultPronenessVector load_fault_proneness_file(
    const std::string& path, std::span<const std::string> unit_ids);
void write_fault_proneness(std::ostream& out,
                           std::span<const std::string> unit_ids,
                           const FaultPronenessVector& fp);

// `rank,test_id` with 1-based ranks.
void write_order_csv(std::ostream& out, const PrioritizedOrder& order,
                     std::span<const std::string> test_ids);
PrioritizedOrder load_order_csv(std::istream& in,
                                std::span<const std::string> test_ids,
                                std::string strategy_name);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace tcprio
