import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nwci.bootstrap import default_h_grid
from nwci.proportion import Method
from nwci.simulation import (
    ScenarioSpec,
    draw_scenario_sample,
    run_coverage_study,
    scenario1_pilot,
    scenario1_truth,
    scenario2_truth,
    scenario_truth,
)
from nwci.smoothing import nw_at


def test_truth_values():
    assert scenario1_truth(0.0) == 0.5
    assert scenario1_truth(math.pi / 2) == pytest.approx(0.95257, abs=5e-6)
    assert scenario2_truth(0.0) == pytest.approx(0.52199, abs=5e-6)
    assert scenario2_truth(-0.088 / 0.770) == pytest.approx(0.5, abs=1e-15)
    assert scenario2_truth(50.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        scenario_truth(3)


@given(st.floats(-10, 10))
def test_scenario1_symmetry(x):
    assert abs(scenario1_truth(-x) - (1 - scenario1_truth(x))) < 1e-12


@given(st.floats(-5, 5), st.floats(0.001, 1))
def test_scenario2_monotone(x, d):
    assert scenario2_truth(x + d) >= scenario2_truth(x)


def test_pilot_formula():
    assert scenario1_pilot(1000) == pytest.approx(0.187136, abs=5e-7)
    assert scenario1_pilot(50) == pytest.approx(0.34069, abs=5e-6)
    # 0.745 * 250^(-1/5) = 0.246927
    assert scenario1_pilot(250) == pytest.approx(0.246927, abs=5e-6)


def test_sample_moments():
    rng = np.random.default_rng(1)
    s1 = draw_scenario_sample(1, 100_000, rng)
    assert abs(s1.xs.mean()) < 0.02
    assert s1.xs.min() >= -math.pi and s1.xs.max() <= math.pi
    mid = np.abs(s1.xs) <= 0.05
    assert abs(s1.ys[mid].mean() - 0.5) < 0.05
    s2 = draw_scenario_sample(2, 100_000, rng)
    assert abs(s2.xs.mean() - (-0.01)) < 0.01
    # mixture variance 0.25 + 0.45*0.55*1.8^2
    assert s2.xs.var() == pytest.approx(0.25 + 0.45 * 0.55 * 1.8 ** 2, rel=0.02)
    assert abs(s2.ys.mean() - np.mean(scenario2_truth(s2.xs))) < 0.01


def test_large_h_nw_is_global_mean():
    diffs, means = [], []
    for seed in range(200):
        s = draw_scenario_sample(1, 100, np.random.default_rng(seed))
        diffs.append(abs(nw_at(s, 0.0, 1e8) - s.ys.mean()))
        means.append(s.ys.mean())
    assert max(diffs) < 1e-9
    assert abs(np.mean(means) - 0.5) < 3 * 0.5 / math.sqrt(200 * 100)


def test_spec_validation():
    with pytest.raises(ValueError):
        ScenarioSpec(scenario=3, n=100)
    with pytest.raises(ValueError):
        ScenarioSpec(scenario=1, n=2)
    with pytest.raises(ValueError):
        ScenarioSpec(scenario=2, n=100, pilot_rule="formula")
    assert ScenarioSpec(scenario=2, n=100).pilot_rule == "aicc"
    assert ScenarioSpec(scenario=1, n=100).pilot_rule == "formula"


def _tiny(**kw):
    base = dict(scenario=1, n=120, eval_points=[0.0, math.pi / 2], m_replicates=6,
                b_resamples=40, h_grid=default_h_grid(0.05, 2, 25), seed=9)
    base.update(kw)
    return ScenarioSpec(**base)


def test_study_deterministic_and_thread_invariant():
    a = run_coverage_study(_tiny())
    b = run_coverage_study(_tiny(threads=3))
    for k in a.covered:
        assert np.array_equal(a.covered[k], b.covered[k])
        assert np.array_equal(a.lengths[k], b.lengths[k], equal_nan=True)
        assert np.array_equal(a.selected_h[k], b.selected_h[k], equal_nan=True)


def test_report_outputs(tmp_path):
    seen = []
    r = run_coverage_study(_tiny(), progress=seen.append)
    assert sorted(seen) == list(range(6))
    for row in r.rows():
        assert 0 <= row["coverage"] <= 1
        assert row["mean_length"] >= 0
    with r.to_csv(tmp_path / "r.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["scenario", "n", "x", "method", "coverage", "mean_length",
                             "h_q25", "h_median", "h_q75"]
    assert len(rows) == 2 * 3
    doc = json.loads(r.to_json(tmp_path / "r.json").read_text())
    assert doc["spec"]["m_replicates"] == 6
    with r.dump_replicates(tmp_path / "rep.csv").open() as fh:
        assert len(list(csv.reader(fh))) == 1 + 6 * 3 * 2
    assert "Wilson" in r.table()
    assert r.coverage(Method.WILSON, 0) == r.coverage("wilson", 0)
