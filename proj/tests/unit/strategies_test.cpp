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

#include <algorithm>
#include <map>
#include <numeric>

#include "oracles.hpp"
#include "tcprio/errors.hpp"
#include "tcprio/strategies.hpp"

namespace tcprio {
namespace {

using testing::make_matrix;
using Perm = std::vector<std::size_t>;

TEST(RandomStrategy, SingleTestAndDeterminism) {
  EXPECT_EQ(prioritize_random(1, 99).permutation(), Perm{0});
  EXPECT_EQ(prioritize_random(5, 42).permutation(),
            prioritize_random(5, 42).permutation());
  EXPECT_NE(prioritize_random(20, 1).permutation(),
            prioritize_random(20, 2).permutation());
  EXPECT_THROW(prioritize_random(0, 1), DomainError);
}

TEST(RandomStrategy, UniformOverPermutations) {
  // 60 000 draws over 6 permutations: each frequency within 1/6 +- 0.01, and
  // the chi-square statistic (5 dof) below the 0.999 quantile 20.52.
  std::map<Perm, int> counts;
  const int draws = 60000;
  for (int s = 0; s < draws; ++s) {
    counts[prioritize_random(3, static_cast<std::uint64_t>(s)).permutation()]++;
  }
  ASSERT_EQ(counts.size(), 6u);
  double chi2 = 0.0;
  const double expected = draws / 6.0;
  for (const auto& [perm, c] : counts) {
    EXPECT_NEAR(c / static_cast<double>(draws), 1.0 / 6.0, 0.01);
    chi2 += (c - expected) * (c - expected) / expected;
  }
  EXPECT_LT(chi2, 20.52);
}

TEST(TotalStrategy, SortsByCoverage) {
  const auto m = make_matrix({{1, 1}, {1, 0}, {0, 0}});
  EXPECT_EQ(prioritize_total(m).permutation(), (Perm{0, 1, 2}));
  // Brute force: the only permutation whose keys are non-increasing.
  Perm p = {0, 1, 2};
  std::vector<Perm> sorted;
  do {
    bool ok = true;
    for (std::size_t r = 1; r < p.size(); ++r) {
      ok = ok && total_coverage(m, p[r - 1]) >= total_coverage(m, p[r]);
    }
    if (ok) sorted.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  ASSERT_EQ(sorted.size(), 1u);
  EXPECT_EQ(sorted[0], (Perm{0, 1, 2}));
}

TEST(TotalStrategy, IdenticalRowsKeepIndexOrder) {
  const auto m = make_matrix({{0.5, 1}, {0.5, 1}, {0.5, 1}, {0.5, 1}});
  EXPECT_EQ(prioritize_total(m).permutation(), (Perm{0, 1, 2, 3}));
}

TEST(TotalStrategy, WeightsReverseTie) {
  const auto m = make_matrix({{1, 0}, {0, 1}});
  EXPECT_EQ(prioritize_total(m).permutation(), (Perm{0, 1}));
  const FaultPronenessVector w({0.1, 0.9});
  EXPECT_EQ(prioritize_total(m, &w).permutation(), (Perm{1, 0}));
  EXPECT_EQ(prioritize_total(m, &w).strategy_name(), "total+fp");
  const FaultPronenessVector bad({0.1});
  EXPECT_THROW(prioritize_total(m, &bad), DimensionMismatchError);
}

TEST(TotalStrategy, RandomTieBreakNeedsSeedAndIsDeterministic) {
  const auto m = make_matrix(std::vector<std::vector<double>>(8, {1, 0}));
  StrategyConfig c;
  c.tie_break = TieBreak::kRandom;
  EXPECT_THROW(prioritize_total(m, nullptr, c), ConfigError);
  c.seed = 5;
  const auto a = prioritize_total(m, nullptr, c);
  EXPECT_EQ(a.permutation(), prioritize_total(m, nullptr, c).permutation());
  EXPECT_TRUE(is_permutation_of_range(a.permutation()));
}

TEST(AdditionalStrategy, GreedyExample) {
  const auto m = make_matrix({{1, 1, 0}, {1, 0, 0}, {0, 0, 1}});
  EXPECT_EQ(prioritize_additional(m).permutation(), (Perm{0, 2, 1}));
  EXPECT_EQ(testing::additional_oracle({{1, 1, 0}, {1, 0, 0}, {0, 0, 1}}),
            (Perm{0, 2, 1}));
}

TEST(AdditionalStrategy, ResetAfterFullCoverage) {
  const auto m = make_matrix({{1}, {1}, {1}});
  EXPECT_EQ(prioritize_additional(m).permutation(), (Perm{0, 1, 2}));
}

TEST(AdditionalStrategy, WeightedResiduals) {
  const auto m = make_matrix({{1, 0}, {0, 1}, {1, 1}});
  const FaultPronenessVector w({1, 0});
  EXPECT_EQ(prioritize_additional(m, &w).permutation(), (Perm{0, 2, 1}));
}

TEST(AdditionalStrategy, WithoutResetFallsBackToTieBreak) {
  // After t0 covers everything, t2 and t1 have zero residual; without reset
  // they stay in index order even though t2 has more total coverage.
  const auto m = make_matrix({{1, 1}, {0, 1}, {1, 1}});
  StrategyConfig c;
  c.reset_on_full_coverage = false;
  EXPECT_EQ(prioritize_additional(m, nullptr, c).permutation(), (Perm{0, 1, 2}));
  c.reset_on_full_coverage = true;
  EXPECT_EQ(prioritize_additional(m, nullptr, c).permutation(), (Perm{0, 2, 1}));
}

TEST(AdditionalStrategy, FractionalRunningMaximum) {
  // t0 covers u0 at 0.5; t1 at 0.75 adds 0.25 on u0; t2 adds 0.3 on u1.
  const auto m = make_matrix({{0.5, 0}, {0.75, 0}, {0, 0.3}});
  EXPECT_EQ(prioritize_additional(m).permutation(), (Perm{1, 2, 0}));
}

TEST(AdditionalStrategy, PreferTotalOnTie) {
  // Both t1 and t2 add one unit after t0; t2 covers more in total.
  const auto m = make_matrix({{1, 1, 0, 0}, {0, 0, 1, 0}, {1, 0, 0, 1}});
  EXPECT_EQ(prioritize_additional(m).permutation(), (Perm{0, 1, 2}));
  StrategyConfig c;
  c.prefer_total_on_tie = true;
  EXPECT_EQ(prioritize_additional(m, nullptr, c).permutation(), (Perm{0, 2, 1}));
}

TEST(StrategyProperties, MatchOraclesOnRandomInstances) {
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(8), m = 1 + rng.below(8);
    const auto binary = testing::random_binary_rows(rng, n, m, 0.35);
    EXPECT_EQ(prioritize_additional(make_matrix(binary)).permutation(),
              testing::additional_oracle(binary));

    const auto frac = testing::random_fractional_rows(rng, n, m, trial % 2 == 0);
    std::vector<double> w(m);
    for (auto& v : w) v = static_cast<double>(rng.below(5)) / 4.0;
    const auto mat = make_matrix(frac);
    const FaultPronenessVector fp(w);
    EXPECT_EQ(prioritize_total(mat).permutation(), testing::total_oracle(frac, {}));
    EXPECT_EQ(prioritize_total(mat, &fp).permutation(), testing::total_oracle(frac, w));
  }
}

TEST(StrategyProperties, UnitWeightsAndPositiveScalingLeaveOrderUnchanged) {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(10), m = 1 + rng.below(10);
    const auto mat = make_matrix(testing::random_fractional_rows(rng, n, m, true));
    const FaultPronenessVector ones(std::vector<double>(m, 1.0));
    EXPECT_EQ(prioritize_total(mat, &ones).permutation(),
              prioritize_total(mat).permutation());
    EXPECT_EQ(prioritize_additional(mat, &ones).permutation(),
              prioritize_additional(mat).permutation());

    // Scaling by a power of two is exact, so the argmax sequence is unchanged.
    std::vector<double> w(m), scaled(m);
    for (std::size_t j = 0; j < m; ++j) {
      w[j] = rng.uniform01();
      scaled[j] = w[j] * 0.25;
    }
    const FaultPronenessVector fw(w), fs(scaled);
    EXPECT_EQ(prioritize_total(mat, &fw).permutation(),
              prioritize_total(mat, &fs).permutation());
    EXPECT_EQ(prioritize_additional(mat, &fw).permutation(),
              prioritize_additional(mat, &fs).permutation());
  }
}

TEST(StrategyProperties, DistinctKeysInvariantUnderRowPermutation) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(8), m = 3 + rng.below(6);
    auto rows = testing::random_fractional_rows(rng, n, m, false);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    std::vector<std::string> ids, shuffled_ids;
    std::vector<double> flat, shuffled_flat;
    for (std::size_t i = 0; i < n; ++i) {
      ids.push_back("t" + std::to_string(i));
      flat.insert(flat.end(), rows[i].begin(), rows[i].end());
      shuffled_ids.push_back("t" + std::to_string(perm[i]));
      shuffled_flat.insert(shuffled_flat.end(), rows[perm[i]].begin(),
                           rows[perm[i]].end());
    }
    std::vector<std::string> units;
    for (std::size_t j = 0; j < m; ++j) units.push_back("u" + std::to_string(j));
    const CoverageMatrix a(ids, units, flat), b(shuffled_ids, units, shuffled_flat);

    std::vector<double> keys;
    for (std::size_t i = 0; i < n; ++i) keys.push_back(total_coverage(a, i));
    std::sort(keys.begin(), keys.end());
    if (std::adjacent_find(keys.begin(), keys.end()) != keys.end()) continue;

    auto names = [](const CoverageMatrix& mat, const PrioritizedOrder& o) {
      std::vector<std::string> out;
      for (std::size_t i : o.permutation()) out.push_back(mat.test_ids()[i]);
      return out;
    };
    EXPECT_EQ(names(a, prioritize_total(a)), names(b, prioritize_total(b)));
  }
}

}  // namespace
}  // namespace tcprio
