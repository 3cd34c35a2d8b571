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

#include "tcprio/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>

#include "tcprio/errors.hpp"

namespace tcprio {

void DistanceMatrix::set(std::size_t i, std::size_t j, double value) {
  if (!(value >= 0.0)) {
    throw DomainError("distance must be non-negative, got " + format_double(value));
  }
  if (i == j && value != 0.0) throw DomainError("distance diagonal must be zero");
  entries_[i * size_ + j] = value;
  entries_[j * size_ + i] = value;
}

std::vector<std::vector<std::size_t>> ClusterAssignment::members() const {
  std::vector<std::vector<std::size_t>> out(k);
  for (std::size_t t = 0; t < labels.size(); ++t) out[labels[t]].push_back(t);
  return out;
}

DistanceMatrix pairwise_distances(const CoverageMatrix& matrix) {
  const std::size_t n = matrix.n_tests();
  DistanceMatrix dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ui = matrix.nonzero_units(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto uj = matrix.nonzero_units(j);
      double sq = 0.0;
      std::size_t p = 0, q = 0;
      while (p < ui.size() || q < uj.size()) {
        double diff;
        if (q == uj.size() || (p < ui.size() && ui[p] < uj[q])) {
          diff = matrix.at(i, ui[p++]);
        } else if (p == ui.size() || uj[q] < ui[p]) {
          diff = matrix.at(j, uj[q++]);
        } else {
          diff = matrix.at(i, ui[p++]) - matrix.at(j, uj[q++]);
        }
        sq += diff * diff;
      }
      dist.set(i, j, std::sqrt(sq));
    }
  }
  return dist;
}

DistanceMatrix apply_fp_override(DistanceMatrix dist,
                                 std::span<const double> fp_cover,
                                 double threshold) {
  if (fp_cover.size() != dist.size()) {
    throw DimensionMismatchError("fault-proneness coverage has " + std::to_string(fp_cover.size()) +
                                 " values for " + std::to_string(dist.size()) +
                                 " tests");
  }
  std::vector<std::size_t> marked;
  for (std::size_t i = 0; i < fp_cover.size(); ++i) {
    if (fp_cover[i] > threshold) marked.push_back(i);
  }
  for (std::size_t a = 0; a < marked.size(); ++a) {
    for (std::size_t b = a + 1; b < marked.size(); ++b) {
      dist.set(marked[a], marked[b], kInfiniteDistance);
    }
  }
  return dist;
}

double resolve_threshold(std::span<const double> fp_cover,
                         const ThresholdSpec& spec) {
  if (spec.mode == ThresholdMode::kAbsolute) return spec.value;
  if (!(spec.value >= 0.0 && spec.value <= 100.0)) {
    throw ConfigError("percentile threshold must be in [0,100]");
  }
  if (fp_cover.empty()) return 0.0;
  std::vector<double> sorted(fp_cover.begin(), fp_cover.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = spec.value / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

ClusterAssignment agglomerative_cluster(const DistanceMatrix& dist, std::size_t k) {
  const std::size_t n = dist.size();
  if (k < 1 || k > n) {
    throw InvalidKError("cluster count " + std::to_string(k) +
                        " must be in [1, " + std::to_string(n) + "]");
  }
  // Cross-pair distance sums and infinite-pair counts between live clusters.
  std::vector<double> sum(n * n, 0.0);
  std::vector<std::uint32_t> inf_pairs(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (std::isinf(dist.at(i, j))) {
        inf_pairs[i * n + j] = 1;
      } else {
        sum[i * n + j] = dist.at(i, j);
      }
    }
  }
  std::vector<std::size_t> size(n, 1);
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  std::vector<std::size_t> live(n);
  for (std::size_t i = 0; i < n; ++i) live[i] = i;

  ClusterAssignment out;
  out.merge_trace.reserve(n - k);
  while (live.size() > k) {
    bool found_finite = false;
    double best_linkage = kInfiniteDistance;
    std::uint32_t best_inf = UINT32_MAX;
    std::size_t best_a = 0, best_b = 0;
    for (std::size_t p = 0; p < live.size(); ++p) {
      const std::size_t a = live[p];
      for (std::size_t q = p + 1; q < live.size(); ++q) {
        const std::size_t b = live[q];
        const std::uint32_t infs = inf_pairs[a * n + b];
        if (infs == 0) {
          const double linkage =
              sum[a * n + b] / static_cast<double>(size[a] * size[b]);
          if (!found_finite || linkage < best_linkage) {
            found_finite = true;
            best_linkage = linkage;
            best_a = a;
            best_b = b;
          }
        } else if (!found_finite && infs < best_inf) {
          best_inf = infs;
          best_a = a;
          best_b = b;
        }
      }
    }
    const std::size_t a = best_a, b = best_b;
    out.merge_trace.push_back(
        {a, b, found_finite ? best_linkage : kInfiniteDistance});
    for (std::size_t c : live) {
      if (c == a || c == b) continue;
      sum[a * n + c] += sum[b * n + c];
      sum[c * n + a] = sum[a * n + c];
      inf_pairs[a * n + c] += inf_pairs[b * n + c];
      inf_pairs[c * n + a] = inf_pairs[a * n + c];
    }
    size[a] += size[b];
    parent[b] = a;
    live.erase(std::find(live.begin(), live.end(), b));
  }

  auto root = [&](std::size_t t) {
    while (parent[t] != t) t = parent[t];
    return t;
  };
  out.k = k;
  out.labels.assign(n, 0);
  std::vector<std::size_t> relabel(n, SIZE_MAX);
  std::size_t next = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t r = root(t);
    if (relabel[r] == SIZE_MAX) relabel[r] = next++;
    out.labels[t] = relabel[r];
  }
  return out;
}

void write_assignment_csv(std::ostream& out, const ClusterAssignment& assignment,
                          std::span<const std::string> test_ids) {
  if (test_ids.size() != assignment.labels.size()) {
    throw DimensionMismatchError("test id count does not match assignment");
  }
  out << "test_id,cluster_id\n";
  for (std::size_t t = 0; t < test_ids.size(); ++t) {
    out << test_ids[t] << ',' << assignment.labels[t] << '\n';
  }
}

void write_merge_trace_csv(std::ostream& out, const ClusterAssignment& assignment) {
  out << "step,cluster_a,cluster_b,linkage\n";
  for (std::size_t s = 0; s < assignment.merge_trace.size(); ++s) {
    const auto& m = assignment.merge_trace[s];
    out << (s + 1) << ',' << m.cluster_a << ',' << m.cluster_b << ','
        << (std::isinf(m.linkage) ? std::string("inf") : format_double(m.linkage))
        << '\n';
  }
}

}  // namespace tcprio
