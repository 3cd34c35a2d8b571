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

import json
import math
import pathlib
import shutil

import numpy as np
import pytest

import tcprio

DATA = pathlib.Path(__file__).resolve().parents[2] / "tests" / "data"


def small_matrix():
    rows = [
        [1, 1, 0, 0],
        [1, 1, 1, 0],
        [0, 0, 0, 1],
        [1, 0, 0, 0],
    ]
    return tcprio.CoverageMatrix(["a", "b", "c", "d"], ["u0", "u1", "u2", "u3"], rows)


def test_matrix_round_trip():
    m = small_matrix()
    assert m.n_tests == 4 and m.n_units == 4
    assert m.test_ids == ["a", "b", "c", "d"]
    np.testing.assert_array_equal(m.to_numpy()[1], [1, 1, 1, 0])
    assert tcprio.total_coverage(m, 1) == 3.0
    assert tcprio.fp_coverage(m, [0.5, 0.0, 0.0, 0.75], 2) == 0.75


def test_shape_mismatch_raises():
    with pytest.raises(tcprio.DataError):
        tcprio.CoverageMatrix(["a"], ["u0", "u1"], [[1.0]])


def test_strategies():
    m = small_matrix()
    assert tcprio.prioritize_total(m) == [1, 0, 2, 3]
    assert tcprio.prioritize_additional(m) == [1, 2, 0, 3]
    assert sorted(tcprio.prioritize_random(4, seed=3)) == [0, 1, 2, 3]
    assert tcprio.prioritize_random(4, seed=3) == tcprio.prioritize_random(4, seed=3)
    weighted = tcprio.prioritize_total(m, fault_proneness=[0, 0, 0, 0.9])
    assert weighted[0] == 2
    with pytest.raises(tcprio.ConfigError):
        tcprio.prioritize_total(m, tie_break="random")


def test_clustering():
    m = small_matrix()
    res = tcprio.prioritize_clustering(m, k=2)
    assert sorted(res["order"]) == [0, 1, 2, 3]
    assert res["k"] == 2 and len(res["labels"]) == 4
    res_fp = tcprio.prioritize_clustering(m, fault_proneness=[0.1, 0.1, 0.1, 0.9], k=2)
    assert sorted(res_fp["order"]) == [0, 1, 2, 3]


def test_metrics():
    ids = ["a", "b", "c", "d"]
    assert tcprio.first_fail([1, 0, 2, 3], ids, {"a"}) == 50.0
    assert tcprio.apfd([0, 1, 2, 3], ids, {"a"}) == pytest.approx(1 - 1 / 4 + 1 / 8)
    with pytest.raises(tcprio.DataError):
        tcprio.first_fail([0, 1, 2, 3], ids, {"zzz"})
    r = tcprio.wilcoxon_signed_rank([1, 2, 3, 4, 5, 6, 7, 8], [0] * 8)
    assert r["exact"] and r["p_value"] == pytest.approx(2 / 256)


def test_prediction(tmp_path):
    rows = ["unit_id,version_id,label,x"]
    for i in range(20):
        rows.append(f"c{i},1,0,{i / 10}")
    for i in range(6):
        rows.append(f"b{i},1,1,{5 + i / 10}")
    path = tmp_path / "features.csv"
    path.write_text("\n".join(rows) + "\n")
    data = tcprio.load_features(str(path))
    assert len(data) == 26 and data.count_buggy() == 6
    balanced = tcprio.rebalance(data, seed=1)
    assert balanced.count_buggy() > 6
    model = tcprio.train_classifier(balanced, lam=1.0)
    scores = model.predict(data)
    assert all(0 < s < 1 for s in scores)
    assert min(scores[20:]) > max(scores[:20])
    assert json.loads(model.to_json())["feature_names"] == ["x"]


def test_pipeline(tmp_path):
    work = tmp_path / "data"
    shutil.copytree(DATA / "mini", work / "mini")
    shutil.copy(DATA / "mini_config.json", work / "config.json")
    config = str(work / "config.json")
    summary = tcprio.run_predict(config)
    assert summary["written"] > 0
    assert tcprio.run_prioritize(config) > 0
    means = tcprio.run_evaluate(config)
    assert set(means) >= {"total", "clustering"}
    assert all(0 < v <= 100 and not math.isnan(v) for v in means.values())
    assert (work / "out" / "report.csv").exists()
