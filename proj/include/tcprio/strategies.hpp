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

// Baseline prioritization strategies: random, total and additional. Passing a
// FaultPronenessVector as `weights` turns total/additional into their
// fault-proneness-weighted forms.

#include <cstdint>
#include <optional>
#include <vector>

#include "tcprio/coverage.hpp"

namespace tcprio {

enum class TieBreak { kByIndex, kRandom };

struct StrategyConfig {
  TieBreak tie_break = TieBreak::kByIndex;
  // Additional only: once no remaining test adds coverage, treat every unit
  // as uncovered again and keep going.
  bool reset_on_full_coverage = true;
  // Additional only: among tests tied on residual coverage prefer the higher
  // (weighted) total coverage before applying tie_break.
  bool prefer_total_on_tie = false;
  std::optional<std::uint64_t> seed;

  // Throws ConfigError when tie_break is random and no seed is set.
  void validate() const;
};

// Rank used to break ties: lower wins. Identity for kByIndex, a seeded random
// permutation for kRandom.
std::vector<std::size_t> tie_ranks(std::size_t n, const StrategyConfig& config);

PrioritizedOrder prioritize_random(std::size_t n_tests, std::uint64_t seed);

// Descending total (or fault-proneness) coverage. O(nm + n log n).
PrioritizedOrder prioritize_total(const CoverageMatrix& matrix,
                                  const FaultPronenessVector* weights = nullptr,
                                  const StrategyConfig& config = {});

// Greedy maximal residual coverage. The residual of test i is
// sum_j max(0, cover(i,j) - covered(j)) * w_j, where covered(j) is the
// running maximum over already selected tests. O(n^2 m).
PrioritizedOrder prioritize_additional(
    const CoverageMatrix& matrix, const FaultPronenessVector* weights = nullptr,
    const StrategyConfig& config = {});

}  // namespace tcprio
