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

#include "tcprio/strategies.hpp"

#include <algorithm>
#include <numeric>

#include "tcprio/errors.hpp"
#include "tcprio/random.hpp"

namespace tcprio {

namespace {

void check_weights(const CoverageMatrix& matrix,
                   const FaultPronenessVector* weights) {
  if (weights != nullptr && weights->size() != matrix.n_units()) {
    throw DimensionMismatchError(
        "weight vector has " + std::to_string(weights->size()) +
        " entries for " + std::to_string(matrix.n_units()) + " units");
  }
}

double coverage_key(const CoverageMatrix& matrix,
                    const FaultPronenessVector* weights, std::size_t test) {
  return weights ? fp_coverage(matrix, *weights, test)
                 : total_coverage(matrix, test);
}

std::string strategy_label(const char* base, const FaultPronenessVector* w) {
  return w ? std::string(base) + "+fp" : std::string(base);
}

}  // namespace

void StrategyConfig::validate() const {
  if (tie_break == TieBreak::kRandom && !seed) {
    throw ConfigError("random tie-break requires a seed");
  }
}

std::vector<std::size_t> tie_ranks(std::size_t n, const StrategyConfig& config) {
  config.validate();
  std::vector<std::size_t> ranks(n);
  std::iota(ranks.begin(), ranks.end(), 0);
  if (config.tie_break == TieBreak::kRandom) {
    Rng rng(derive_seed(*config.seed, "tie-break"));
    rng.shuffle(ranks);
  }
  return ranks;
}

PrioritizedOrder prioritize_random(std::size_t n_tests, std::uint64_t seed) {
  if (n_tests == 0) throw DomainError("cannot prioritize an empty test suite");
  std::vector<std::size_t> order(n_tests);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  return PrioritizedOrder(std::move(order), "random", seed);
}

PrioritizedOrder prioritize_total(const CoverageMatrix& matrix,
                                  const FaultPronenessVector* weights,
                                  const StrategyConfig& config) {
  check_weights(matrix, weights);
  const std::size_t n = matrix.n_tests();
  const auto ranks = tie_ranks(n, config);
  std::vector<double> keys(n);
  for (std::size_t i = 0; i < n; ++i) keys[i] = coverage_key(matrix, weights, i);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (keys[a] != keys[b]) return keys[a] > keys[b];
    return ranks[a] < ranks[b];
  });
  return PrioritizedOrder(std::move(order), strategy_label("total", weights),
                          config.seed);
}

PrioritizedOrder prioritize_additional(const CoverageMatrix& matrix,
                                       const FaultPronenessVector* weights,
                                       const StrategyConfig& config) {
  check_weights(matrix, weights);
  const std::size_t n = matrix.n_tests();
  const auto ranks = tie_ranks(n, config);
  std::vector<double> totals(n, 0.0);
  if (config.prefer_total_on_tie) {
    for (std::size_t i = 0; i < n; ++i) totals[i] = coverage_key(matrix, weights, i);
  }

  std::vector<double> covered(matrix.n_units(), 0.0);
  bool anything_covered = false;
  std::vector<std::size_t> remaining(n);
  std::iota(remaining.begin(), remaining.end(), 0);
  std::vector<double> residual(n, 0.0);
  std::vector<std::size_t> order;
  order.reserve(n);

  auto compute_residuals = [&] {
    double best = 0.0;
    for (std::size_t i : remaining) {
      double sum = 0.0;
      for (std::uint32_t u : matrix.nonzero_units(i)) {
        const double gain = std::max(0.0, matrix.at(i, u) - covered[u]);
        sum += weights ? gain * (*weights)[u] : gain;
      }
      residual[i] = sum;
      best = std::max(best, sum);
    }
    return best;
  };

  while (!remaining.empty()) {
    if (compute_residuals() == 0.0 && config.reset_on_full_coverage &&
        anything_covered) {
      std::fill(covered.begin(), covered.end(), 0.0);
      anything_covered = false;
      compute_residuals();
    }
    auto better = [&](std::size_t a, std::size_t b) {
      if (residual[a] != residual[b]) return residual[a] > residual[b];
      if (totals[a] != totals[b]) return totals[a] > totals[b];
      return ranks[a] < ranks[b];
    };
    auto pick = std::min_element(remaining.begin(), remaining.end(), better);
    const std::size_t chosen = *pick;
    remaining.erase(pick);
    order.push_back(chosen);
    for (std::uint32_t u : matrix.nonzero_units(chosen)) {
      covered[u] = std::max(covered[u], matrix.at(chosen, u));
      anything_covered = true;
    }
  }
  return PrioritizedOrder(std::move(order),
                          strategy_label("additional", weights), config.seed);
}

}  // namespace tcprio
