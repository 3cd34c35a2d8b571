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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <sstream>

#include "tcprio/cluster_tcp.hpp"
#include "tcprio/clustering.hpp"
#include "tcprio/coverage.hpp"
#include "tcprio/defect_prediction.hpp"
#include "tcprio/errors.hpp"
#include "tcprio/evaluation.hpp"
#include "tcprio/pipeline.hpp"
#include "tcprio/strategies.hpp"

namespace py = pybind11;
using namespace tcprio;

namespace {

using FpArg = std::optional<std::vector<double>>;

std::optional<FaultPronenessVector> to_fp(const FpArg& scores) {
  if (!scores) return std::nullopt;
  return FaultPronenessVector(*scores);
}

const FaultPronenessVector* ptr(const std::optional<FaultPronenessVector>& fp) {
  return fp ? &*fp : nullptr;
}

StrategyConfig strategy_config(const std::string& tie_break, std::optional<std::uint64_t> seed,
                               bool reset, bool prefer_total_on_tie) {
  StrategyConfig c;
  if (tie_break == "by_index") {
    c.tie_break = TieBreak::kByIndex;
  } else if (tie_break == "random") {
    c.tie_break = TieBreak::kRandom;
  } else {
    throw ConfigError("tie_break must be by_index or random");
  }
  c.seed = seed;
  c.reset_on_full_coverage = reset;
  c.prefer_total_on_tie = prefer_total_on_tie;
  return c;
}

ThresholdSpec threshold_spec(const std::string& mode, double value) {
  if (mode == "percentile") return {ThresholdMode::kPercentile, value};
  if (mode == "absolute") return {ThresholdMode::kAbsolute, value};
  throw ConfigError("threshold_mode must be 'percentile' or 'absolute'");
}

std::optional<InternalMode> internal_mode(const std::optional<std::string>& mode) {
  if (!mode) return std::nullopt;
  if (*mode == "total") return InternalMode::kTotal;
  if (*mode == "fp_rank") return InternalMode::kFpRank;
  throw ConfigError("internal_mode must be 'total' or 'fp_rank'");
}

CoverageMatrix make_matrix(std::vector<std::string> test_ids, std::vector<std::string> unit_ids,
                           py::array_t<double, py::array::c_style | py::array::forcecast> rows) {
  if (rows.ndim() != 2) throw DimensionMismatchError("coverage rows must be 2-D");
  if (static_cast<std::size_t>(rows.shape(0)) != test_ids.size() ||
      static_cast<std::size_t>(rows.shape(1)) != unit_ids.size()) {
    throw DimensionMismatchError("coverage shape does not match the id lists");
  }
  std::vector<double> entries(rows.data(), rows.data() + rows.size());
  return CoverageMatrix(std::move(test_ids), std::move(unit_ids), std::move(entries));
}

VersionOutcome make_outcome(const std::set<std::string>& failing,
                            const std::optional<std::map<std::string, std::set<std::string>>>&
                                fault_map) {
  VersionOutcome o;
  o.version_id = "";
  o.failing_tests = failing;
  if (fault_map) {
    o.fault_map = *fault_map;
  } else {
    o.fault_map = {{"fault", failing}};
  }
  o.validate();
  return o;
}

PipelineConfig load_config(const std::string& path, const std::optional<std::string>& out,
                           std::optional<std::uint64_t> seed) {
  auto c = load_pipeline_config(path);
  if (out) c.output_dir = *out;
  if (seed) c.seed = *seed;
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Coverage-based test case prioritization with clustering and fault-proneness.";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  auto config_error = py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  auto data_error = py::register_exception<DataError>(m, "DataError", error.ptr());
  py::register_exception<InternalError>(m, "InternalError", error.ptr());
  (void)config_error;
  (void)data_error;

  py::class_<CoverageMatrix>(m, "CoverageMatrix")
      .def(py::init(&make_matrix), py::arg("test_ids"), py::arg("unit_ids"), py::arg("rows"))
      .def_property_readonly("n_tests", &CoverageMatrix::n_tests)
      .def_property_readonly("n_units", &CoverageMatrix::n_units)
      .def_property_readonly("test_ids", &CoverageMatrix::test_ids)
      .def_property_readonly("unit_ids", &CoverageMatrix::unit_ids)
      .def("to_numpy",
           [](const CoverageMatrix& mat) {
             py::array_t<double> out({mat.n_tests(), mat.n_units()});
             auto view = out.mutable_unchecked<2>();
             for (std::size_t i = 0; i < mat.n_tests(); ++i) {
               for (std::size_t j = 0; j < mat.n_units(); ++j) {
                 view(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(j)) = mat.at(i, j);
               }
             }
             return out;
           })
      .def("__eq__", [](const CoverageMatrix& a, const CoverageMatrix& b) { return a == b; });

  m.def("load_coverage", &load_coverage_matrix_file, py::arg("path"),
        "Load a coverage matrix from CSV, or JSON when the path ends in .json.");
  m.def("total_coverage", &total_coverage, py::arg("matrix"), py::arg("test"));
  m.def(
      "fp_coverage",
      [](const CoverageMatrix& mat, std::vector<double> fp, std::size_t test) {
        return fp_coverage(mat, FaultPronenessVector(std::move(fp)), test);
      },
      py::arg("matrix"), py::arg("fault_proneness"), py::arg("test"));

  m.def(
      "prioritize_random",
      [](std::size_t n, std::uint64_t seed) { return prioritize_random(n, seed).permutation(); },
      py::arg("n_tests"), py::arg("seed"));
  m.def(
      "prioritize_total",
      [](const CoverageMatrix& mat, const FpArg& fp, const std::string& tie_break,
         std::optional<std::uint64_t> seed) {
        const auto weights = to_fp(fp);
        return prioritize_total(mat, ptr(weights),
                                strategy_config(tie_break, seed, true, false))
            .permutation();
      },
      py::arg("matrix"), py::arg("fault_proneness") = py::none(), py::arg("tie_break") = "by_index",
      py::arg("seed") = py::none());
  m.def(
      "prioritize_additional",
      [](const CoverageMatrix& mat, const FpArg& fp, const std::string& tie_break,
         std::optional<std::uint64_t> seed, bool reset, bool prefer_total_on_tie) {
        const auto weights = to_fp(fp);
        return prioritize_additional(
                   mat, ptr(weights),
                   strategy_config(tie_break, seed, reset, prefer_total_on_tie))
            .permutation();
      },
      py::arg("matrix"), py::arg("fault_proneness") = py::none(), py::arg("tie_break") = "by_index",
      py::arg("seed") = py::none(), py::arg("reset") = true,
      py::arg("prefer_total_on_tie") = false);
  m.def(
      "prioritize_clustering",
      [](const CoverageMatrix& mat, const FpArg& fp, std::size_t k,
         const std::string& threshold_mode, double threshold_value,
         const std::optional<std::string>& mode, bool fp_batch_sort) {
        const auto weights = to_fp(fp);
        ClusteringConfig c;
        c.k = k;
        c.threshold = threshold_spec(threshold_mode, threshold_value);
        c.internal_mode = internal_mode(mode);
        c.fp_batch_sort = fp_batch_sort;
        const auto res = prioritize_clustering_detailed(mat, ptr(weights), c);
        py::dict out;
        out["order"] = res.order.permutation();
        out["labels"] = res.assignment.labels;
        out["k"] = res.assignment.k;
        out["threshold"] = res.threshold;
        return out;
      },
      py::arg("matrix"), py::arg("fault_proneness") = py::none(), py::arg("k") = 200,
      py::arg("threshold_mode") = "percentile", py::arg("threshold_value") = 90.0,
      py::arg("internal_mode") = py::none(), py::arg("fp_batch_sort") = false,
      "Cluster, prioritize inside clusters, then merge round-robin. Returns a dict with "
      "'order', 'labels', 'k' and the resolved override 'threshold' (None without scores).");

  m.def(
      "first_fail",
      [](const std::vector<std::size_t>& order, const std::vector<std::string>& test_ids,
         const std::set<std::string>& failing) {
        return first_fail(PrioritizedOrder(order, "python"), test_ids,
                          make_outcome(failing, std::nullopt));
      },
      py::arg("order"), py::arg("test_ids"), py::arg("failing_tests"));
  m.def(
      "apfd",
      [](const std::vector<std::size_t>& order, const std::vector<std::string>& test_ids,
         const std::set<std::string>& failing,
         const std::optional<std::map<std::string, std::set<std::string>>>& fault_map) {
        return apfd(PrioritizedOrder(order, "python"), test_ids, make_outcome(failing, fault_map));
      },
      py::arg("order"), py::arg("test_ids"), py::arg("failing_tests"),
      py::arg("fault_map") = py::none());
  m.def(
      "wilcoxon_signed_rank",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        const auto r = wilcoxon_signed_rank(a, b);
        py::dict out;
        out["statistic"] = r.statistic;
        out["p_value"] = r.p_value;
        out["n_nonzero"] = r.n_nonzero;
        out["exact"] = r.exact;
        return out;
      },
      py::arg("a"), py::arg("b"));

  py::class_<FeatureDataset>(m, "FeatureDataset")
      .def_readonly("feature_names", &FeatureDataset::feature_names)
      .def("__len__", [](const FeatureDataset& d) { return d.samples.size(); })
      .def("count_buggy", [](const FeatureDataset& d) { return d.count(Label::kBuggy); })
      .def_property_readonly("unit_ids", [](const FeatureDataset& d) {
        std::vector<std::string> ids;
        for (const auto& s : d.samples) ids.push_back(s.unit_id);
        return ids;
      });
  m.def("load_features", &load_feature_file, py::arg("path"));
  m.def("feature_deltas", &build_feature_deltas, py::arg("current"), py::arg("previous"));
  m.def(
      "rebalance",
      [](const FeatureDataset& d, std::uint64_t seed, std::size_t k, double ratio) {
        return rebalance(d, {k, ratio, seed});
      },
      py::arg("dataset"), py::arg("seed"), py::arg("k") = 5, py::arg("ratio") = 0.5,
      "SMOTE oversampling of buggy samples followed by Tomek-link cleaning.");

  py::class_<ClassifierModel>(m, "ClassifierModel")
      .def_readonly("weights", &ClassifierModel::weights)
      .def_readonly("bias", &ClassifierModel::bias)
      .def_readonly("lambda_", &ClassifierModel::lambda)
      .def("score", [](const ClassifierModel& model,
                       const std::vector<double>& x) { return model.score(x); })
      .def("predict", &predict_scores, py::arg("dataset"))
      .def("to_json", [](const ClassifierModel& model) {
        std::ostringstream out;
        write_model_json(out, model);
        return out.str();
      });
  m.def(
      "train_classifier",
      [](const FeatureDataset& d, double lambda, std::size_t max_iterations) {
        TrainingParams p;
        p.max_iterations = max_iterations;
        return train_classifier(d, lambda, p);
      },
      py::arg("dataset"), py::arg("lam") = 1.0, py::arg("max_iterations") = 500);

  m.def(
      "run_predict",
      [](const std::string& config, const std::optional<std::string>& out,
         std::optional<std::uint64_t> seed) {
        std::vector<std::string> warnings;
        const auto s = cmd_predict(load_config(config, out, seed),
                                   [&](const std::string& w) { warnings.push_back(w); });
        py::dict d;
        d["written"] = s.written;
        d["skipped"] = s.skipped;
        d["bug_hits"] = s.bug_hits;
        d["warnings"] = warnings;
        return d;
      },
      py::arg("config"), py::arg("out") = py::none(), py::arg("seed") = py::none());
  m.def(
      "run_prioritize",
      [](const std::string& config, const std::optional<std::string>& out,
         std::optional<std::uint64_t> seed) {
        return cmd_prioritize(load_config(config, out, seed)).written;
      },
      py::arg("config"), py::arg("out") = py::none(), py::arg("seed") = py::none());
  m.def(
      "run_evaluate",
      [](const std::string& config, const std::optional<std::string>& out,
         std::optional<std::uint64_t> seed) {
        return cmd_evaluate(load_config(config, out, seed)).per_strategy_mean;
      },
      py::arg("config"), py::arg("out") = py::none(), py::arg("seed") = py::none(),
      "Write the report files and return the mean first-fail per strategy.");
}
