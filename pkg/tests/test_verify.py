import json

import numpy as np
import pytest

from mixext.config import ExperimentConfig
from mixext.verify import SUITES, report_json, run_suite, slope, stability_report

FAST = [n for n in SUITES if n != "main_theorem"]


@pytest.mark.parametrize("name", FAST)
def test_suite_passes_d1(name):
    res = run_suite(name, ExperimentConfig(d=1))
    failed = {k: v for k, v in res["checks"].items() if not v["passed"]}
    assert res["passed"], failed


@pytest.mark.parametrize("name", ["index", "splines", "quasiinterp", "extension", "class_check", "bernstein", "catalog"])
def test_suite_passes_d2(name):
    res = run_suite(name, ExperimentConfig(d=2))
    failed = {k: v for k, v in res["checks"].items() if not v["passed"]}
    assert res["passed"], failed


def test_fault_injection_is_detected():
    res = run_suite("class_check", ExperimentConfig(d=1, inject_pprime_fault=True, trials=3))
    assert not res["passed"]


def test_slope_helper():
    assert slope([1, 2, 3], [2.0, 4.0, 8.0]) == pytest.approx(1.0)


def test_stability_report_flags_large_steps():
    rows = {"f": {"ratio_by_lam": {"0": [1.0, 2.0, 2.1]}}, "g": {"ratio_by_lam": {"0": [3.0, 2.0, 1.0]}}}
    rep = stability_report(rows)
    assert not rep["passed"] and rep["change"]["g[0]"] == pytest.approx(0.5)
    assert rep["monotone"] == {"f[0]": False, "g[0]": True}


def test_report_json_is_canonical():
    text = report_json({"b": np.float64(1.5), "a": [np.inf, np.nan, np.int64(2), True]})
    assert json.loads(text) == {"a": ["inf", "nan", 2, True], "b": 1.5}
    assert text.index('"a"') < text.index('"b"')
