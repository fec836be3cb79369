import csv
import json

import numpy as np
import pytest

from mixext.cli import main


def _run(args, capsys):
    code = main(args)
    return code, capsys.readouterr()


def test_print_config(capsys):
    code, cap = _run(["--print-config", "--seed", "5"], capsys)
    assert code == 0 and "seed = 5" in cap.out


def test_bad_config_reports_and_exits_nonzero(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text("p = 0.5\n")
    code, cap = _run(["verify", "--config", str(p)], capsys)
    assert code == 2 and "configuration error" in cap.err
    code, cap = _run(["verify", "--config", str(tmp_path / "missing.cfg")], capsys)
    assert code == 2


def test_extend_writes_consistent_csv(tmp_path, capsys):
    cfg = tmp_path / "e.cfg"
    cfg.write_text("function = abs25\nK = 3\nlam = 1\ngrid_lo = -9\ngrid_hi = 9\ngrid_n = 57\n")
    code, cap = _run(["extend", "--config", str(cfg), "--out", str(tmp_path)], capsys)
    assert code == 0
    with open(tmp_path / "extension_samples.csv") as fh:
        rows = list(csv.reader(fh))
    head = rows[0]
    assert head[:2] == ["x1", "value"] and head[-2:] == ["d_lambda_value", "restriction_error"]
    assert [h for h in head if h.startswith("level_")] == [f"level_{k}" for k in range(4)]
    data = np.array([[float(v) for v in r] for r in rows[1:]])
    levels = data[:, 2:6]
    assert np.abs(levels.sum(axis=1) - data[:, 1]).max() <= 1e-10
    # the grid was clipped to the support box
    assert data[:, 0].min() > -9 and data[:, 0].max() < 9
    # shortest round-trip floats
    assert all(repr(float(v)) == v for v in rows[1])
    meta = json.loads((tmp_path / "extension.json").read_text())
    assert meta["schema"] == 1
    assert np.abs(data[:, -1]).max() <= meta["diagnostics"]["E_K_error_max_on_samples"] + 1e-10


def test_extend_clip_warning(tmp_path, caplog):
    cfg = tmp_path / "e.cfg"
    cfg.write_text("K = 1\ngrid_lo = -9\ngrid_hi = 9\ngrid_n = 5\n")
    with caplog.at_level("WARNING"):
        assert main(["extend", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    assert any("clipped" in r.message for r in caplog.records)


def test_extend_is_deterministic(tmp_path, capsys):
    cfg = tmp_path / "e.cfg"
    cfg.write_text("d = 2\nK = 2\ngrid_n = 7\nfunction = exp_sin\n")
    texts = []
    for _ in range(2):
        assert main(["extend", "--config", str(cfg), "--out", str(tmp_path)]) == 0
        texts.append(((tmp_path / "extension_samples.csv").read_bytes(), (tmp_path / "extension.json").read_bytes()))
    capsys.readouterr()
    assert texts[0] == texts[1]


def test_norms_with_ratio_table(tmp_path, capsys):
    cfg = tmp_path / "n.cfg"
    cfg.write_text("function = sin\nK = 3\nwith_extension = true\n")
    code, cap = _run(["norms", "--config", str(cfg), "--out", str(tmp_path)], capsys)
    assert code == 0
    rep = json.loads((tmp_path / "norms.json").read_text())
    assert rep["schema"] == 1 and rep["besov_prime"]["kind"] == "besov_prime"
    lams = {tuple(r["lam"]) for r in rep["ratio_table"]}
    assert lams == {(0,), (1,)}
    for r in rep["ratio_table"]:
        assert r["ratio"] == pytest.approx(r["lhs"] / r["rhs_norm"])


def test_norms_theta_inf_routes_to_nikolskii(tmp_path, capsys):
    cfg = tmp_path / "n.cfg"
    cfg.write_text("theta = inf\n")
    code, _ = _run(["norms", "--config", str(cfg), "--out", str(tmp_path)], capsys)
    rep = json.loads((tmp_path / "norms.json").read_text())
    assert code == 0 and "Nikolskii" in rep["metadata"]["route"]
    assert rep["besov_prime"]["kind"] == "nikolskii_prime"


def test_verify_fault_injection_fails(tmp_path, capsys):
    cfg = tmp_path / "v.cfg"
    cfg.write_text("suites = class_check\ninject_pprime_fault = true\ntrials = 3\n")
    code, cap = _run(["verify", "--config", str(cfg), "--out", str(tmp_path)], capsys)
    assert code == 1 and "FAIL" in cap.out
    rep = json.loads((tmp_path / "verify_report.json").read_text())
    assert rep["schema"] == 1 and rep["passed"] is False


def test_unknown_function(tmp_path, capsys):
    cfg = tmp_path / "e.cfg"
    cfg.write_text("function = nope\n")
    code, cap = _run(["extend", "--config", str(cfg), "--out", str(tmp_path)], capsys)
    assert code == 2 and "nope" in cap.err


def test_verify_unknown_suite(tmp_path, capsys):
    cfg = tmp_path / "v.cfg"
    cfg.write_text("suites = nope\n")
    code, cap = _run(["verify", "--config", str(cfg), "--out", str(tmp_path)], capsys)
    assert code == 2 and "nope" in cap.err
