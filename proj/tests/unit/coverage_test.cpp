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

#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "oracles.hpp"
#include "tcprio/coverage.hpp"
#include "tcprio/errors.hpp"

namespace tcprio {
namespace {

using testing::make_matrix;

CoverageMatrix from_csv(const std::string& text) {
  std::istringstream in(text);
  return load_coverage_matrix(in, CoverageFormat::kCsv);
}

TEST(LoadCoverage, CsvMapsFieldsDirectly) {
  const auto m = from_csv("test_id,unit_a,unit_b\nt1,1,0\nt2,0.5,1\n");
  ASSERT_EQ(m.n_tests(), 2u);
  ASSERT_EQ(m.n_units(), 2u);
  EXPECT_EQ(m.at(*m.find_test("t2"), *m.find_unit("unit_a")), 0.5);
  EXPECT_EQ(m.at(0, 0), 1.0);
  EXPECT_EQ(m.at(0, 1), 0.0);
}

TEST(LoadCoverage, AcceptsCrlf) {
  const auto m = from_csv("test_id,a,b\r\nt1,1,0\r\nt2,0.25,1\r\n");
  EXPECT_EQ(m.at(1, 0), 0.25);
  EXPECT_EQ(m.unit_ids().back(), "b");
}

TEST(LoadCoverage, RejectsOutOfRangeEntry) {
  EXPECT_THROW(from_csv("test_id,a,b\nt1,1.2,0\n"), DomainError);
  EXPECT_THROW(from_csv("test_id,a\nt1,-0.1\n"), DomainError);
}

TEST(LoadCoverage, RejectsDuplicateIds) {
  EXPECT_THROW(from_csv("test_id,a,b\nt1,1,0\nt1,0,1\n"), DuplicateIdError);
  EXPECT_THROW(from_csv("test_id,a,a\nt1,1,0\n"), DuplicateIdError);
}

TEST(LoadCoverage, RejectsRaggedAndMissingEntries) {
  EXPECT_THROW(from_csv("test_id,a,b\nt1,1\n"), ParseError);
  EXPECT_THROW(from_csv("test_id,a,b\nt1,1,\n"), ParseError);
  EXPECT_THROW(from_csv("test_id,a,b\nt1,1,x\n"), ParseError);
  EXPECT_THROW(from_csv("test_id,a,b\nt1,1,nan\n"), ParseError);
}

TEST(LoadCoverage, RejectsEmptyMatrix) {
  EXPECT_THROW(from_csv("test_id,a\n"), DomainError);
  EXPECT_THROW(from_csv(""), ParseError);
}

TEST(LoadCoverage, Json) {
  std::istringstream in(
      R"({"test_ids":["t1","t2"],"unit_ids":["a","b"],"rows":[[1,0],[0.5,1]]})");
  const auto m = load_coverage_matrix(in, CoverageFormat::kJson);
  EXPECT_EQ(m.at(1, 0), 0.5);

  std::istringstream bad(R"({"test_ids":["t1"],"unit_ids":["a","b"],"rows":[[1]]})");
  EXPECT_THROW(load_coverage_matrix(bad, CoverageFormat::kJson), ParseError);
}

TEST(LoadCoverage, CsvAndJsonRoundTrip) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = make_matrix(testing::random_fractional_rows(rng, 6, 5, trial % 2 == 0));
    std::stringstream csv, json;
    write_coverage_csv(csv, m);
    write_coverage_json(json, m);
    EXPECT_EQ(load_coverage_matrix(csv, CoverageFormat::kCsv), m);
    EXPECT_EQ(load_coverage_matrix(json, CoverageFormat::kJson), m);
  }
}

TEST(TotalCoverage, SumsRow) {
  const auto m = make_matrix({{1, 0, 1}, {0, 0, 0}, {0.25, 0.5, 0.75}});
  EXPECT_EQ(total_coverage(m, 0), 2.0);
  EXPECT_EQ(total_coverage(m, 1), 0.0);
  const std::vector<double> row = {0.25, 0.5, 0.75};
  EXPECT_EQ(total_coverage(m, 2), std::accumulate(row.begin(), row.end(), 0.0));
  EXPECT_EQ(total_coverage(m, 2), 1.5);
  EXPECT_THROW(total_coverage(m, 3), IndexError);
}

TEST(FpCoverage, WeightsUnits) {
  const auto m = make_matrix({{1, 1}, {1, 0.5}, {0.2, 0.8}});
  EXPECT_EQ(fp_coverage(m, FaultPronenessVector({0, 0}), 0), 0.0);
  EXPECT_EQ(fp_coverage(m, FaultPronenessVector({1, 1}), 1), 1.5);
  EXPECT_EQ(fp_coverage(m, FaultPronenessVector({1, 1}), 1), total_coverage(m, 1));
  const double oracle = testing::key_oracle({0.2, 0.8}, {0.5, 0.25});
  EXPECT_DOUBLE_EQ(fp_coverage(m, FaultPronenessVector({0.5, 0.25}), 2), 0.3);
  EXPECT_EQ(fp_coverage(m, FaultPronenessVector({0.5, 0.25}), 2), oracle);
  EXPECT_THROW(fp_coverage(m, FaultPronenessVector({1}), 0), DimensionMismatchError);
  EXPECT_THROW(fp_coverage(m, FaultPronenessVector({1, 1}), 9), IndexError);
}

TEST(FpCoverage, UnitWeightsEqualTotalAndScaleLinearly) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = make_matrix(testing::random_fractional_rows(rng, 5, 7, false));
    const FaultPronenessVector ones(std::vector<double>(7, 1.0));
    std::vector<double> w(7), half(7);
    for (std::size_t j = 0; j < 7; ++j) {
      w[j] = rng.uniform01();
      half[j] = w[j] * 0.5;
    }
    for (std::size_t i = 0; i < m.n_tests(); ++i) {
      EXPECT_EQ(fp_coverage(m, ones, i), total_coverage(m, i));
      // Halving is exact in binary floating point.
      EXPECT_EQ(fp_coverage(m, FaultPronenessVector(half), i),
                0.5 * fp_coverage(m, FaultPronenessVector(w), i));
    }
  }
}

TEST(TotalCoverage, MonotoneInEntries) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto rows = testing::random_fractional_rows(rng, 1, 6, false);
    const double before = total_coverage(make_matrix(rows), 0);
    const std::size_t j = rng.below(6);
    rows[0][j] = rows[0][j] + (1.0 - rows[0][j]) * rng.uniform01();
    EXPECT_GE(total_coverage(make_matrix(rows), 0), before);
  }
}

TEST(FaultProneness, LoadReconcilesByIdAndRejectsUnknown) {
  const std::vector<std::string> units = {"a", "b", "c"};
  std::istringstream in("unit_id,score\nc,0.5\na,0.25\nb,1\n");
  const auto fp = load_fault_proneness(in, units);
  EXPECT_EQ(fp[0], 0.25);
  EXPECT_EQ(fp[1], 1.0);
  EXPECT_EQ(fp[2], 0.5);

  std::istringstream unknown("unit_id,score\na,0.1\nb,0.1\nc,0.1\nz,0.1\n");
  EXPECT_THROW(load_fault_proneness(unknown, units), UnknownUnitError);
  std::istringstream missing("unit_id,score\na,0.1\nb,0.1\n");
  EXPECT_THROW(load_fault_proneness(missing, units), UnknownUnitError);
  std::istringstream range("unit_id,score\na,0.1\nb,1.5\nc,0\n");
  EXPECT_THROW(load_fault_proneness(range, units), DomainError);
}

TEST(PrioritizedOrder, RequiresBijection) {
  EXPECT_NO_THROW(PrioritizedOrder({2, 0, 1}, "x"));
  EXPECT_THROW(PrioritizedOrder({0, 0, 1}, "x"), DomainError);
  EXPECT_THROW(PrioritizedOrder({0, 3, 1}, "x"), DomainError);
}

TEST(OrderCsv, RoundTrip) {
  const std::vector<std::string> ids = {"x", "y", "z"};
  const PrioritizedOrder order({2, 0, 1}, "total");
  std::stringstream s;
  write_order_csv(s, order, ids);
  EXPECT_EQ(s.str(), "rank,test_id\n1,z\n2,x\n3,y\n");
  EXPECT_EQ(load_order_csv(s, ids, "total").permutation(), order.permutation());
}

}  // namespace
}  // namespace tcprio
