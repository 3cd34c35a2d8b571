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

// Cluster-based prioritization: cluster the tests, order each cluster
// internally, then repeatedly take the next test of every cluster and append
// that batch sorted by total coverage.

#include <cstddef>
#include <optional>
#include <vector>

#include "tcprio/clustering.hpp"
#include "tcprio/coverage.hpp"
#include "tcprio/strategies.hpp"

namespace tcprio {

enum class InternalMode {
  kTotal,   // total coverage, descending
  kFpRank,  // fault-proneness coverage descending, then total coverage
};

struct InternalOrderSet {
  // per_cluster[c] lists the members of cluster c in internal priority order.
  std::vector<std::vector<std::size_t>> per_cluster;
  InternalMode mode = InternalMode::kTotal;
};

InternalOrderSet internal_prioritize(const ClusterAssignment& assignment,
                                     const CoverageMatrix& matrix,
                                     const FaultPronenessVector* fp,
                                     InternalMode mode,
                                     const StrategyConfig& config = {});

// When `batch_fp` is set each batch is sorted by fault-proneness coverage
// instead of total coverage.
PrioritizedOrder round_robin_merge(const InternalOrderSet& orders,
                                   const CoverageMatrix& matrix,
                                   const StrategyConfig& config = {},
                                   const FaultPronenessVector* batch_fp = nullptr);

struct ClusteringConfig {
  std::size_t k = 200;  // clamped to the number of tests
  ThresholdSpec threshold;
  // Defaults to kFpRank when fault-proneness is given, kTotal otherwise.
  std::optional<InternalMode> internal_mode;
  bool fp_batch_sort = false;
  StrategyConfig strategy;
};

struct ClusteringResult {
  PrioritizedOrder order;
  ClusterAssignment assignment;
  double threshold = 0.0;  // resolved override threshold, +FP variant only
};

// Plain clustering when `fp` is null; the +FP variant (distance override and
// fault-proneness internal order) otherwise.
ClusteringResult prioritize_clustering_detailed(const CoverageMatrix& matrix,
                                                const FaultPronenessVector* fp,
                                                const ClusteringConfig& config = {});

PrioritizedOrder prioritize_clustering(const CoverageMatrix& matrix,
                                       const FaultPronenessVector* fp = nullptr,
                                       const ClusteringConfig& config = {});

}  // namespace tcprio
