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

#include "tcprio/defect_prediction.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "json.hpp"
#include "tcprio/csv.hpp"
#include "tcprio/errors.hpp"
#include "tcprio/random.hpp"

namespace tcprio {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::vector<std::vector<double>> standardized_rows(const FeatureDataset& data) {
  const auto stats = Standardization::fit(data);
  std::vector<std::vector<double>> rows;
  rows.reserve(data.samples.size());
  for (const auto& s : data.samples) rows.push_back(stats.apply(s.features));
  return rows;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

struct Objective {
  const std::vector<std::vector<double>>& x;
  const std::vector<double>& y;
  const std::vector<double>& w;
  double weight_sum;
  double l2;

  double loss(std::span<const double> theta) const {
    const std::size_t d = theta.size() - 1;
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double z = theta[d];
      for (std::size_t j = 0; j < d; ++j) z += theta[j] * x[i][j];
      // Cross-entropy: y * softplus(-z) + (1 - y) * softplus(z).
      total += w[i] * (y[i] > 0.5 ? softplus(-z) : softplus(z));
    }
    double reg = 0.0;
    for (std::size_t j = 0; j < d; ++j) reg += theta[j] * theta[j];
    return total / weight_sum + 0.5 * l2 * reg;
  }

  std::vector<double> gradient(std::span<const double> theta) const {
    const std::size_t d = theta.size() - 1;
    std::vector<double> g(theta.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      double z = theta[d];
      for (std::size_t j = 0; j < d; ++j) z += theta[j] * x[i][j];
      const double r = w[i] * (sigmoid(z) - y[i]);
      for (std::size_t j = 0; j < d; ++j) g[j] += r * x[i][j];
      g[d] += r;
    }
    for (std::size_t j = 0; j < d; ++j) g[j] = g[j] / weight_sum + l2 * theta[j];
    g[d] /= weight_sum;
    return g;
  }
};

}  // namespace

std::size_t FeatureDataset::count(Label label) const {
  return static_cast<std::size_t>(std::count_if(
      samples.begin(), samples.end(),
      [label](const FeatureSample& s) { return s.label == label; }));
}

void FeatureDataset::validate() const {
  for (const auto& s : samples) {
    if (s.features.size() != dimension()) {
      throw DimensionMismatchError("unit '" + s.unit_id + "' has " +
                                   std::to_string(s.features.size()) +
                                   " features, expected " +
                                   std::to_string(dimension()));
    }
    for (double v : s.features) {
      if (!std::isfinite(v)) {
        throw NonFiniteFeatureError("unit '" + s.unit_id + "' has a non-finite feature");
      }
    }
  }
}

FeatureDataset load_feature_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!csv::next_line(in, line, line_no)) throw ParseError("feature csv: empty input");
  auto header = csv::split_line(line);
  if (header.size() < 4 || header[0] != "unit_id" || header[1] != "version_id" ||
      header[2] != "label") {
    throw ParseError(
        "feature csv: header must be 'unit_id,version_id,label,<features...>'");
  }
  FeatureDataset data;
  data.feature_names.assign(header.begin() + 3, header.end());
  while (csv::next_line(in, line, line_no)) {
    auto fields = csv::split_line(line);
    const std::string where = "feature csv line " + std::to_string(line_no);
    if (fields.size() != header.size()) {
      throw ParseError(where + ": expected " + std::to_string(header.size()) +
                       " fields, got " + std::to_string(fields.size()));
    }
    FeatureSample s;
    s.unit_id = std::move(fields[0]);
    s.version_id = std::move(fields[1]);
    if (fields[2] == "1") {
      s.label = Label::kBuggy;
    } else if (fields[2] == "0") {
      s.label = Label::kClean;
    } else {
      throw ParseError(where + ": label must be 0 or 1");
    }
    for (std::size_t c = 3; c < fields.size(); ++c) {
      s.features.push_back(csv::parse_double(fields[c], where));
    }
    data.samples.push_back(std::move(s));
  }
  return data;
}

FeatureDataset load_feature_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFeatureFileError("cannot open feature file '" + path + "'");
  return load_feature_csv(in);
}

void write_feature_csv(std::ostream& out, const FeatureDataset& data) {
  out << "unit_id,version_id,label";
  for (const auto& f : data.feature_names) out << ',' << f;
  out << '\n';
  for (const auto& s : data.samples) {
    out << s.unit_id << ',' << s.version_id << ','
        << (s.label == Label::kBuggy ? 1 : 0);
    for (double v : s.features) out << ',' << format_double(v);
    out << '\n';
  }
}

Standardization Standardization::fit(const FeatureDataset& data) {
  const std::size_t d = data.dimension();
  Standardization st{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
  const double n = static_cast<double>(data.samples.size());
  if (data.samples.empty()) return st;
  for (const auto& s : data.samples) {
    for (std::size_t j = 0; j < d; ++j) st.mean[j] += s.features[j];
  }
  for (auto& m : st.mean) m /= n;
  std::vector<double> var(d, 0.0);
  for (const auto& s : data.samples) {
    for (std::size_t j = 0; j < d; ++j) {
      const double c = s.features[j] - st.mean[j];
      var[j] += c * c;
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    const double sd = std::sqrt(var[j] / n);
    st.scale[j] = sd > 0.0 && std::isfinite(sd) ? sd : 1.0;
  }
  return st;
}

std::vector<double> Standardization::apply(std::span<const double> x) const {
  if (x.size() != mean.size()) {
    throw DimensionMismatchError("feature vector has " + std::to_string(x.size()) +
                                 " values, model expects " +
                                 std::to_string(mean.size()));
  }
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) / scale[j];
  return out;
}

FeatureDataset build_feature_deltas(const FeatureDataset& current,
                                    const FeatureDataset& previous) {
  if (current.feature_names != previous.feature_names) {
    throw FeatureNameMismatchError(
        "feature names differ between consecutive versions");
  }
  current.validate();
  previous.validate();
  std::unordered_map<std::string, const FeatureSample*> prev;
  for (const auto& s : previous.samples) prev.emplace(s.unit_id, &s);

  FeatureDataset out;
  out.feature_names = current.feature_names;
  for (const auto& name : current.feature_names) {
    out.feature_names.push_back("delta_" + name);
  }
  const std::size_t d = current.dimension();
  for (const auto& s : current.samples) {
    FeatureSample o{s.unit_id, s.version_id, s.features, s.label};
    auto it = prev.find(s.unit_id);
    for (std::size_t j = 0; j < d; ++j) {
      o.features.push_back(it == prev.end() ? s.features[j]
                                            : s.features[j] - it->second->features[j]);
    }
    out.samples.push_back(std::move(o));
  }
  return out;
}

std::size_t smote_synthetic_count(std::size_t minority, std::size_t total,
                                  double target_ratio) {
  if (!(target_ratio > 0.0 && target_ratio <= 1.0)) {
    throw DomainError("target minority ratio must be in (0,1]");
  }
  auto reached = [&](std::size_t s) {
    return static_cast<double>(minority + s) >=
           target_ratio * static_cast<double>(total + s);
  };
  if (reached(0)) return 0;
  if (target_ratio >= 1.0) {
    throw DomainError("a minority ratio of 1 cannot be reached while clean samples exist");
  }
  const double estimate = (target_ratio * static_cast<double>(total) -
                           static_cast<double>(minority)) /
                          (1.0 - target_ratio);
  auto s = static_cast<std::size_t>(std::max(0.0, std::ceil(estimate)));
  while (s > 0 && reached(s - 1)) --s;
  while (!reached(s)) ++s;
  return s;
}

FeatureDataset smote_oversample(const FeatureDataset& data, const SmoteParams& params) {
  data.validate();
  if (params.k < 1) throw DomainError("SMOTE needs k >= 1");
  std::vector<std::size_t> minority;
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    if (data.samples[i].label == Label::kBuggy) minority.push_back(i);
  }
  const std::size_t needed = smote_synthetic_count(
      minority.size(), data.samples.size(), params.target_minority_ratio);
  if (needed == 0) return data;
  if (minority.size() < 2) {
    throw InsufficientMinorityError("SMOTE needs at least 2 buggy samples, got " +
                                    std::to_string(minority.size()));
  }

  const auto rows = standardized_rows(data);
  const std::size_t m = minority.size();
  const std::size_t k = std::min(params.k, m - 1);
  // neighbours[a] = the k nearest other minority samples of minority[a],
  // closest first, ties by position.
  std::vector<std::vector<std::size_t>> neighbours(m);
  for (std::size_t a = 0; a < m; ++a) {
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t b = 0; b < m; ++b) {
      if (b != a) {
        cand.emplace_back(squared_distance(rows[minority[a]], rows[minority[b]]), b);
      }
    }
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k),
                      cand.end());
    for (std::size_t t = 0; t < k; ++t) neighbours[a].push_back(cand[t].second);
  }

  FeatureDataset out = data;
  Rng rng(params.seed);
  for (std::size_t s = 0; s < needed; ++s) {
    const std::size_t a = rng.below(m);
    const std::size_t b = neighbours[a][rng.below(k)];
    const double u = rng.uniform01();
    const auto& x = data.samples[minority[a]];
    const auto& nn = data.samples[minority[b]];
    FeatureSample syn{"smote#" + std::to_string(s), x.version_id, {}, Label::kBuggy};
    syn.features.resize(x.features.size());
    for (std::size_t j = 0; j < x.features.size(); ++j) {
      syn.features[j] = x.features[j] + u * (nn.features[j] - x.features[j]);
    }
    out.samples.push_back(std::move(syn));
  }
  return out;
}

FeatureDataset tomek_link_removal(const FeatureDataset& data) {
  data.validate();
  const std::size_t n = data.samples.size();
  if (n < 2) return data;
  const auto rows = standardized_rows(data);
  // Exact nearest neighbour by sweeping outward along the first coordinate;
  // equal distances resolve to the lower index.
  std::vector<std::size_t> by_x(n);
  std::iota(by_x.begin(), by_x.end(), 0);
  std::stable_sort(by_x.begin(), by_x.end(),
                   [&](std::size_t a, std::size_t b) { return rows[a][0] < rows[b][0]; });
  std::vector<std::size_t> nearest(n);
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t i = by_x[p];
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = n;
    auto visit = [&](std::size_t j) {
      const double dx = rows[j][0] - rows[i][0];
      if (dx * dx > best) return false;
      const double d = squared_distance(rows[i], rows[j]);
      if (d < best || (d == best && j < best_j)) {
        best = d;
        best_j = j;
      }
      return true;
    };
    for (std::size_t q = p; q-- > 0;) {
      if (!visit(by_x[q])) break;
    }
    for (std::size_t q = p + 1; q < n; ++q) {
      if (!visit(by_x[q])) break;
    }
    nearest[i] = best_j;
  }
  std::vector<bool> drop(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = nearest[i];
    if (nearest[j] == i && data.samples[i].label != data.samples[j].label) {
      drop[data.samples[i].label == Label::kClean ? i : j] = true;
    }
  }
  FeatureDataset out;
  out.feature_names = data.feature_names;
  for (std::size_t i = 0; i < n; ++i) {
    if (!drop[i]) out.samples.push_back(data.samples[i]);
  }
  return out;
}

double ClassifierModel::score(std::span<const double> features) const {
  const auto x = standardization.apply(features);
  double z = bias;
  for (std::size_t j = 0; j < x.size(); ++j) z += weights[j] * x[j];
  // Keep scores strictly inside (0,1) even when the sigmoid saturates.
  return std::clamp(sigmoid(z), std::numeric_limits<double>::min(),
                    std::nextafter(1.0, 0.0));
}

ClassifierModel train_classifier(const FeatureDataset& data, double lambda,
                                 const TrainingParams& params, TrainingTrace* trace) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError("class weight lambda must be a positive finite number");
  }
  data.validate();
  if (data.count(Label::kBuggy) == 0 || data.count(Label::kClean) == 0) {
    throw SingleClassError("training data must contain buggy and clean samples");
  }
  ClassifierModel model;
  model.feature_names = data.feature_names;
  model.standardization = Standardization::fit(data);
  model.lambda = lambda;

  std::vector<std::vector<double>> x;
  std::vector<double> y, w;
  double weight_sum = 0.0;
  for (const auto& s : data.samples) {
    x.push_back(model.standardization.apply(s.features));
    const bool buggy = s.label == Label::kBuggy;
    y.push_back(buggy ? 1.0 : 0.0);
    w.push_back(buggy ? lambda : 1.0);
    weight_sum += w.back();
  }
  const Objective objective{x, y, w, weight_sum, params.l2};

  const std::size_t d = data.dimension();
  std::vector<double> theta(d + 1, 0.0);
  double loss = objective.loss(theta);
  double step = params.initial_step;
  TrainingTrace local;
  local.loss.push_back(loss);
  for (std::size_t it = 0; it < params.max_iterations; ++it) {
    const auto g = objective.gradient(theta);
    double g2 = 0.0;
    for (double v : g) g2 += v * v;
    if (g2 == 0.0) {
      local.converged = true;
      break;
    }
    // Armijo backtracking keeps the loss sequence non-increasing.
    std::vector<double> candidate(theta.size());
    double next_loss = loss;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings) {
      for (std::size_t j = 0; j < theta.size(); ++j) candidate[j] = theta[j] - step * g[j];
      next_loss = objective.loss(candidate);
      if (next_loss <= loss - 1e-4 * step * g2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      local.converged = true;
      break;
    }
    theta.swap(candidate);
    const double decrease = loss - next_loss;
    loss = next_loss;
    local.loss.push_back(loss);
    step = std::min(step * 2.0, params.initial_step);
    if (decrease <= params.tolerance * std::max(1.0, std::abs(loss))) {
      local.converged = true;
      break;
    }
  }
  model.weights.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(d));
  model.bias = theta[d];
  if (trace) *trace = std::move(local);
  return model;
}

std::vector<double> predict_scores(const ClassifierModel& model,
                                   const FeatureDataset& units) {
  if (units.dimension() != model.weights.size()) {
    throw DimensionMismatchError("dataset has " + std::to_string(units.dimension()) +
                                 " features, model expects " +
                                 std::to_string(model.weights.size()));
  }
  std::vector<double> out;
  out.reserve(units.samples.size());
  for (const auto& s : units.samples) out.push_back(model.score(s.features));
  return out;
}

FaultPronenessVector predict_fault_proneness(const ClassifierModel& model,
                                             const FeatureDataset& units,
                                             std::span<const std::string> unit_order) {
  const auto scores = predict_scores(model, units);
  std::unordered_map<std::string, double> by_id;
  for (std::size_t i = 0; i < units.samples.size(); ++i) {
    by_id.emplace(units.samples[i].unit_id, scores[i]);
  }
  std::vector<double> ordered;
  ordered.reserve(unit_order.size());
  for (const auto& id : unit_order) {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw UnknownUnitError("no features for unit '" + id + "'");
    }
    ordered.push_back(it->second);
  }
  return FaultPronenessVector(std::move(ordered));
}

bool bug_hit(const FaultPronenessVector& fp, std::span<const std::string> unit_ids,
             const std::set<std::string>& buggy_unit_ids, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw DomainError("bug-hit threshold must be in [0,1]");
  }
  if (unit_ids.size() != fp.size()) {
    throw DimensionMismatchError("unit id count does not match score count");
  }
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < unit_ids.size(); ++j) index.emplace(unit_ids[j], j);
  bool hit = false;
  for (const auto& id : buggy_unit_ids) {
    auto it = index.find(id);
    if (it == index.end()) throw UnknownUnitError("unknown buggy unit '" + id + "'");
    hit = hit || fp[it->second] > threshold;
  }
  return hit;
}

double ConfusionCounts::recall() const {
  const auto p = true_positive + false_negative;
  return p == 0 ? 0.0 : static_cast<double>(true_positive) / static_cast<double>(p);
}

double ConfusionCounts::precision() const {
  const auto p = true_positive + false_positive;
  return p == 0 ? 0.0 : static_cast<double>(true_positive) / static_cast<double>(p);
}

double ConfusionCounts::f_score() const {
  const double p = precision(), r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

ConfusionCounts evaluate_classifier(const ClassifierModel& model,
                                    const FeatureDataset& data, double threshold) {
  ConfusionCounts c;
  const auto scores = predict_scores(model, data);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] > threshold;
    const bool actual = data.samples[i].label == Label::kBuggy;
    if (predicted && actual) ++c.true_positive;
    if (predicted && !actual) ++c.false_positive;
    if (!predicted && actual) ++c.false_negative;
    if (!predicted && !actual) ++c.true_negative;
  }
  return c;
}

TuningResult tune_classifier(const FeatureDataset& data,
                             std::span<const double> lambdas,
                             std::span<const TrainingParams> params,
                             double validation_fraction, std::uint64_t seed) {
  if (lambdas.empty() || params.empty()) throw ConfigError("empty tuning grid");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation fraction must be in (0,1)");
  }
  FeatureDataset train, validation;
  train.feature_names = validation.feature_names = data.feature_names;
  Rng rng(seed);
  for (Label label : {Label::kBuggy, Label::kClean}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < data.samples.size(); ++i) {
      if (data.samples[i].label == label) idx.push_back(i);
    }
    rng.shuffle(idx);
    auto n_val = static_cast<std::size_t>(
        std::lround(validation_fraction * static_cast<double>(idx.size())));
    n_val = std::clamp<std::size_t>(n_val, idx.size() > 1 ? 1 : 0,
                                    idx.size() > 0 ? idx.size() - 1 : 0);
    for (std::size_t t = 0; t < idx.size(); ++t) {
      (t < n_val ? validation : train).samples.push_back(data.samples[idx[t]]);
    }
  }
  TuningResult best;
  bool first = true;
  for (double lambda : lambdas) {
    for (const auto& p : params) {
      const auto model = train_classifier(train, lambda, p);
      const double f = evaluate_classifier(model, validation).f_score();
      if (first || f > best.f_score) {
        best = {lambda, p, f};
        first = false;
      }
    }
  }
  return best;
}

FeatureDataset rebalance(const FeatureDataset& data, const SmoteParams& params,
                         bool* smote_skipped) {
  if (smote_skipped) *smote_skipped = false;
  FeatureDataset oversampled;
  try {
    oversampled = smote_oversample(data, params);
  } catch (const InsufficientMinorityError&) {
    if (smote_skipped) *smote_skipped = true;
    oversampled = data;
  }
  return tomek_link_removal(oversampled);
}

void write_model_json(std::ostream& out, const ClassifierModel& model) {
  nlohmann::ordered_json doc;
  doc["feature_names"] = model.feature_names;
  auto& pairs = doc["standardization"] = nlohmann::ordered_json::array();
  for (std::size_t j = 0; j < model.standardization.mean.size(); ++j) {
    pairs.push_back({{"mean", model.standardization.mean[j]},
                     {"scale", model.standardization.scale[j]}});
  }
  doc["weights"] = model.weights;
  doc["bias"] = model.bias;
  doc["lambda"] = model.lambda;
  out << doc.dump(2) << '\n';
}

ClassifierModel load_model_json(std::istream& in) {
  ClassifierModel model;
  try {
    const auto doc = nlohmann::json::parse(in);
    model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    for (const auto& p : doc.at("standardization")) {
      model.standardization.mean.push_back(p.at("mean").get<double>());
      model.standardization.scale.push_back(p.at("scale").get<double>());
    }
    model.weights = doc.at("weights").get<std::vector<double>>();
    model.bias = doc.at("bias").get<double>();
    model.lambda = doc.at("lambda").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model json: ") + e.what());
  }
  const std::size_t d = model.feature_names.size();
  if (model.weights.size() != d || model.standardization.mean.size() != d) {
    throw DimensionMismatchError("model json: inconsistent feature dimension");
  }
  for (double s : model.standardization.scale) {
    if (!(s > 0.0)) throw DomainError("model json: scale entries must be positive");
  }
  return model;
}

}  // namespace tcprio
