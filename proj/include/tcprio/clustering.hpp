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

// Agglomerative hierarchical clustering of tests by coverage vectors, with
// average linkage over euclidean distances and an optional override that puts
// infinite distance between every pair of highly fault-prone tests.

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tcprio/coverage.hpp"

namespace tcprio {

inline constexpr double kInfiniteDistance = std::numeric_limits<double>::infinity();

// Symmetric n x n matrix with zero diagonal; entries are >= 0 or infinite.
class DistanceMatrix {
 public:
  explicit DistanceMatrix(std::size_t size)
      : size_(size), entries_(size * size, 0.0) {}

  std::size_t size() const { return size_; }
  double at(std::size_t i, std::size_t j) const { return entries_[i * size_ + j]; }
  // Sets both (i,j) and (j,i). Throws DomainError for negative or NaN values
  // and for a non-zero diagonal.
  void set(std::size_t i, std::size_t j, double value);

 private:
  std::size_t size_;
  std::vector<double> entries_;
};

struct MergeRecord {
  std::size_t cluster_a;  // surviving id, always < cluster_b
  std::size_t cluster_b;
  double linkage;
};

struct ClusterAssignment {
  std::vector<std::size_t> labels;  // test index -> cluster id in [0, K)
  std::size_t k = 0;
  std::vector<MergeRecord> merge_trace;

  // Members of each cluster in ascending test index.
  std::vector<std::vector<std::size_t>> members() const;
};

// Euclidean distance between coverage rows, using the sparse row structure.
DistanceMatrix pairwise_distances(const CoverageMatrix& matrix);

// d(i,j) := inf for every i != j with fp_cover[i] > threshold and
// fp_cover[j] > threshold. Throws DimensionMismatchError.
DistanceMatrix apply_fp_override(DistanceMatrix dist,
                                 std::span<const double> fp_cover,
                                 double threshold);

enum class ThresholdMode { kAbsolute, kPercentile };

struct ThresholdSpec {
  ThresholdMode mode = ThresholdMode::kPercentile;
  double value = 90.0;
};

// Resolves a threshold spec against the per-test fault-proneness coverage values. Percentiles
// interpolate linearly between order statistics.
double resolve_threshold(std::span<const double> fp_cover,
                         const ThresholdSpec& spec);

// Bottom-up average-linkage merging down to k clusters.
//
// At each step the pair with the smallest linkage
// sum(d(a,b)) / (|A| |B|) is merged, ties going to the smallest
// (cluster_a, cluster_b) pair. A pair with any infinite cross distance has
// infinite linkage. When only infinite pairs remain and k is not reached,
// the pair with the fewest infinite cross distances is merged. The merged
// cluster keeps the smaller id; final labels are renumbered 0..k-1 by
// smallest member. Throws InvalidKError unless 1 <= k <= n.
ClusterAssignment agglomerative_cluster(const DistanceMatrix& dist, std::size_t k);

// `test_id,cluster_id`
void write_assignment_csv(std::ostream& out, const ClusterAssignment& assignment,
                          std::span<const std::string> test_ids);
// `step,cluster_a,cluster_b,linkage` with the literal `inf` for infinity.
void write_merge_trace_csv(std::ostream& out, const ClusterAssignment& assignment);

}  // namespace tcprio
