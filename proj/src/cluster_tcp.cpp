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

#include "tcprio/cluster_tcp.hpp"

#include <algorithm>

#include "tcprio/errors.hpp"

namespace tcprio {

namespace {

std::vector<double> totals_of(const CoverageMatrix& matrix) {
  std::vector<double> out(matrix.n_tests());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = total_coverage(matrix, i);
  return out;
}

std::vector<double> fp_totals_of(const CoverageMatrix& matrix,
                                 const FaultPronenessVector& fp) {
  std::vector<double> out(matrix.n_tests());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fp_coverage(matrix, fp, i);
  return out;
}

}  // namespace

InternalOrderSet internal_prioritize(const ClusterAssignment& assignment,
                                     const CoverageMatrix& matrix,
                                     const FaultPronenessVector* fp,
                                     InternalMode mode,
                                     const StrategyConfig& config) {
  if (mode == InternalMode::kFpRank && fp == nullptr) {
    throw MissingFaultPronenessError(
        "fault-proneness internal ordering needs a fault-proneness vector");
  }
  if (assignment.labels.size() != matrix.n_tests()) {
    throw DimensionMismatchError("cluster assignment does not match the matrix");
  }
  const auto ranks = tie_ranks(matrix.n_tests(), config);
  const auto totals = totals_of(matrix);
  std::vector<double> primary =
      mode == InternalMode::kFpRank ? fp_totals_of(matrix, *fp) : totals;

  InternalOrderSet out;
  out.mode = mode;
  out.per_cluster = assignment.members();
  for (auto& members : out.per_cluster) {
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      if (primary[a] != primary[b]) return primary[a] > primary[b];
      if (totals[a] != totals[b]) return totals[a] > totals[b];
      return ranks[a] < ranks[b];
    });
  }
  return out;
}

PrioritizedOrder round_robin_merge(const InternalOrderSet& orders,
                                   const CoverageMatrix& matrix,
                                   const StrategyConfig& config,
                                   const FaultPronenessVector* batch_fp) {
  const std::size_t n = matrix.n_tests();
  if (orders.per_cluster.empty()) {
    throw InconsistentOrderSetError("no clusters to merge");
  }
  std::vector<bool> seen(n, false);
  std::size_t count = 0;
  std::size_t rounds = 0;
  for (const auto& members : orders.per_cluster) {
    if (members.empty()) throw InconsistentOrderSetError("empty cluster");
    rounds = std::max(rounds, members.size());
    for (std::size_t t : members) {
      if (t >= n || seen[t]) {
        throw InconsistentOrderSetError("test index " + std::to_string(t) +
                                        " is out of range or repeated");
      }
      seen[t] = true;
      ++count;
    }
  }
  if (count != n) {
    throw InconsistentOrderSetError("clusters hold " + std::to_string(count) +
                                    " tests, matrix has " + std::to_string(n));
  }

  const auto ranks = tie_ranks(n, config);
  const auto keys = batch_fp ? fp_totals_of(matrix, *batch_fp) : totals_of(matrix);
  std::vector<std::size_t> order;
  order.reserve(n);
  std::vector<std::size_t> batch;
  for (std::size_t r = 0; r < rounds; ++r) {
    batch.clear();
    for (const auto& members : orders.per_cluster) {
      if (r < members.size()) batch.push_back(members[r]);
    }
    std::sort(batch.begin(), batch.end(), [&](std::size_t a, std::size_t b) {
      if (keys[a] != keys[b]) return keys[a] > keys[b];
      return ranks[a] < ranks[b];
    });
    order.insert(order.end(), batch.begin(), batch.end());
  }
  return PrioritizedOrder(std::move(order), "clustering", config.seed);
}

ClusteringResult prioritize_clustering_detailed(const CoverageMatrix& matrix,
                                                const FaultPronenessVector* fp,
                                                const ClusteringConfig& config) {
  if (fp != nullptr && fp->size() != matrix.n_units()) {
    throw DimensionMismatchError("fault-proneness vector does not match units");
  }
  if (config.k == 0) throw InvalidKError("cluster count must be at least 1");
  const std::size_t k = std::min(config.k, matrix.n_tests());
  const std::string name = fp ? "clustering+fp" : "clustering";

  DistanceMatrix dist = pairwise_distances(matrix);
  double threshold = 0.0;
  if (fp != nullptr) {
    const auto cover = fp_totals_of(matrix, *fp);
    threshold = resolve_threshold(cover, config.threshold);
    dist = apply_fp_override(std::move(dist), cover, threshold);
  }
  ClusterAssignment assignment = agglomerative_cluster(dist, k);

  const InternalMode mode = config.internal_mode.value_or(
      fp ? InternalMode::kFpRank : InternalMode::kTotal);
  const auto internal =
      internal_prioritize(assignment, matrix, fp, mode, config.strategy);
  const auto merged = round_robin_merge(internal, matrix, config.strategy,
                                        config.fp_batch_sort ? fp : nullptr);
  return {PrioritizedOrder(merged.permutation(), name, config.strategy.seed),
          std::move(assignment), threshold};
}

PrioritizedOrder prioritize_clustering(const CoverageMatrix& matrix,
                                       const FaultPronenessVector* fp,
                                       const ClusteringConfig& config) {
  return prioritize_clustering_detailed(matrix, fp, config).order;
}

}  // namespace tcprio
