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

// Per-unit fault-proneness from versioned feature vectors and bug labels.
//
// The training path is: feature deltas between consecutive versions, SMOTE
// oversampling of buggy units, Tomek-link removal of clean units sitting next
// to buggy ones, then a class-weighted logistic model (buggy samples weigh
// lambda, clean ones 1). All nearest-neighbour searches and the model work on
// standardized features.

#include <cstdint>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tcprio/coverage.hpp"

namespace tcprio {

enum class Label { kClean = 0, kBuggy = 1 };

struct FeatureSample {
  std::string unit_id;
  std::string version_id;
  std::vector<double> features;
  Label label = Label::kClean;
};

struct FeatureDataset {
  std::vector<std::string> feature_names;
  std::vector<FeatureSample> samples;

  std::size_t dimension() const { return feature_names.size(); }
  std::size_t count(Label label) const;
  // Throws DimensionMismatchError or NonFiniteFeatureError.
  void validate() const;
};

// `unit_id,version_id,label,<f1>,...,<fd>` with label 0 (clean) or 1 (buggy).
FeatureDataset load_feature_csv(std::istream& in);
FeatureDataset load_feature_file(const std::string& path);
void write_feature_csv(std::ostream& out, const FeatureDataset& data);

// Per-feature (mean, scale); scale is the population standard deviation, or
// 1 for constant features.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardization fit(const FeatureDataset& data);
  std::vector<double> apply(std::span<const double> x) const;
};

// Features become [current, current - previous] per unit, matched by unit_id.
// Units without a previous row use previous = 0. Labels come from `current`.
// Throws FeatureNameMismatchError.
FeatureDataset build_feature_deltas(const FeatureDataset& current,
                                    const FeatureDataset& previous);

struct SmoteParams {
  std::size_t k = 5;
  double target_minority_ratio = 0.5;
  std::uint64_t seed = 0;
};

// Appends synthetic buggy samples x + u (x_nn - x) until buggy/total reaches
// the target ratio. For each synthetic sample the stream draws, in order:
// base = below(m), neighbour = below(min(k, m-1)), u = uniform01().
// Throws InsufficientMinorityError with fewer than two buggy samples.
FeatureDataset smote_oversample(const FeatureDataset& data, const SmoteParams& params);

// Number of synthetic samples needed to reach the target ratio.
std::size_t smote_synthetic_count(std::size_t minority, std::size_t total,
                                  double target_ratio);

// Removes the clean member of every mutual-nearest-neighbour pair with
// opposite labels. Buggy samples are never removed.
FeatureDataset tomek_link_removal(const FeatureDataset& data);

struct TrainingParams {
  std::size_t max_iterations = 500;
  double initial_step = 1.0;
  double l2 = 1e-4;
  double tolerance = 1e-8;  // stop when the relative loss decrease falls below
};

struct ClassifierModel {
  std::vector<std::string> feature_names;
  Standardization standardization;
  std::vector<double> weights;
  double bias = 0.0;
  double lambda = 1.0;

  double score(std::span<const double> features) const;
};

struct TrainingTrace {
  std::vector<double> loss;  // objective after each accepted iteration
  bool converged = false;
};

// Full-batch gradient descent with Armijo backtracking on the class-weighted
// cross-entropy (plus a small L2 term). Throws SingleClassError,
// NonFiniteFeatureError or DomainError for lambda <= 0.
ClassifierModel train_classifier(const FeatureDataset& data, double lambda,
                                 const TrainingParams& params = {},
                                 TrainingTrace* trace = nullptr);

// Scores in sample order. Throws DimensionMismatchError.
std::vector<double> predict_scores(const ClassifierModel& model,
                                   const FeatureDataset& units);

// Scores reordered to `unit_order`; every id must have a sample.
// Throws UnknownUnitError or DimensionMismatchError.
FaultPronenessVector predict_fault_proneness(const ClassifierModel& model,
                                             const FeatureDataset& units,
                                             std::span<const std::string> unit_order);

// True iff some buggy unit scores strictly above `threshold`.
bool bug_hit(const FaultPronenessVector& fp, std::span<const std::string> unit_ids,
             const std::set<std::string>& buggy_unit_ids, double threshold);

inline constexpr double kDefaultBugHitThreshold = 0.3;

struct ConfusionCounts {
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t true_negative = 0;
  std::size_t false_negative = 0;

  double recall() const;
  double precision() const;
  double f_score() const;
};

ConfusionCounts evaluate_classifier(const ClassifierModel& model,
                                    const FeatureDataset& data,
                                    double threshold = 0.5);

struct TuningResult {
  double lambda = 1.0;
  TrainingParams params;
  double f_score = 0.0;
};

// Grid search over lambda x params maximizing validation F-score. The
// validation split is stratified and drawn from `seed`. Ties keep the first
// grid point.
TuningResult tune_classifier(const FeatureDataset& data,
                             std::span<const double> lambdas,
                             std::span<const TrainingParams> params,
                             double validation_fraction, std::uint64_t seed);

// SMOTE (skipped with fewer than two buggy samples) followed by Tomek links.
FeatureDataset rebalance(const FeatureDataset& data, const SmoteParams& params,
                         bool* smote_skipped = nullptr);

void write_model_json(std::ostream& out, const ClassifierModel& model);
ClassifierModel load_model_json(std::istream& in);

}  // namespace tcprio
