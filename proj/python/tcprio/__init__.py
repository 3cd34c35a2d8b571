# Copyright 2026 The tcprio Authors
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Coverage-based test case prioritization with clustering and fault-proneness."""

from ._core import (
    ClassifierModel,
    ConfigError,
    CoverageMatrix,
    DataError,
    Error,
    FeatureDataset,
    InternalError,
    apfd,
    feature_deltas,
    first_fail,
    fp_coverage,
    load_coverage,
    load_features,
    prioritize_additional,
    prioritize_clustering,
    prioritize_random,
    prioritize_total,
    rebalance,
    run_evaluate,
    run_predict,
    run_prioritize,
    total_coverage,
    train_classifier,
    wilcoxon_signed_rank,
)

__all__ = [name for name in dir() if not name.startswith("_")]
