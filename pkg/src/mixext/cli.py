"""Command line driver: ``mixext verify | extend | norms``."""
from __future__ import annotations

import argparse
import csv
import itertools
import logging
import os
import sys

import numpy as np

from . import catalog as cat
from .analysis import SmoothnessParams, besov_norm_prime, derivative_besov_norm, nikolskii_norm_prime
from .config import ConfigError, ExperimentConfig, load_config
from .extension import extend
from .piecewise import support_box_Qm
from .quasiinterp import quasi_interp_E
from .verify import REPORT_SCHEMA, report_json, run_verify

log = logging.getLogger("mixext")


def _write(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# ----------------------------------------------------------------------------
# verify


def cmd_verify(cfg: ExperimentConfig) -> int:
    report = run_verify(cfg)
    path = os.path.join(cfg.out, "verify_report.json")
    _write(path, report_json(report))
    for name, suite in report["suites"].items():
        print(f"{'PASS' if suite['passed'] else 'FAIL'}  {name}")
        for check, rec in suite["checks"].items():
            if not rec["passed"]:
                print(f"      failed: {check}")
    print(f"report: {path}")
    return 0 if report["passed"] else 1


# ----------------------------------------------------------------------------
# extend


def sample_grid(cfg: ExperimentConfig, m) -> list[np.ndarray]:
    """Uniform per-axis grids over the requested box, clipped to the support box."""
    W = support_box_Qm(m)
    axes = []
    for j in range(cfg.d):
        lo, hi = cfg.grid_lo[j], cfg.grid_hi[j]
        clo, chi = max(lo, W.corner[j]), min(hi, W.upper[j])
        if (clo, chi) != (lo, hi):
            log.warning("sample box clipped to the support box on axis %d", j + 1)
        if chi <= clo:
            # nothing of the request lies inside: keep the request, every value is 0
            clo, chi = lo, hi
        axes.append(np.linspace(clo, chi, cfg.grid_n[j]))
    return axes


def cmd_extend(cfg: ExperimentConfig) -> int:
    f = cat.get(cfg.function, cfg.d)
    E = extend(f, cfg.alpha, cfg.p, cfg.theta, m=cfg.m, K=cfg.K_eff, order=cfg.order())
    axes = sample_grid(cfg, E.m)
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, cfg.d)
    value = E(X)
    shells = E.shell_values(X)
    lam = cfg.lam
    with_lam = any(lam)
    dval = E(X, lam) if with_lam else None
    inside = np.all((X >= 0) & (X <= 1), axis=1)
    restr = np.where(inside, np.abs(f(X) - value), 0.0)
    EK = quasi_interp_E((E.K,) * cfg.d, E.l, E.m, f, cfg.order())
    ek_err = float(np.max(np.where(inside, np.abs(f(X) - EK(X)), 0.0)))
    header = [f"x{j + 1}" for j in range(cfg.d)] + ["value"] + [f"level_{k}" for k in range(E.K + 1)]
    if with_lam:
        header.append("d_lambda_value")
    header.append("restriction_error")
    os.makedirs(cfg.out, exist_ok=True)
    csv_path = os.path.join(cfg.out, "extension_samples.csv")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(X.shape[0]):
            row = list(X[i]) + [value[i]] + [s[i] for s in shells]
            if with_lam:
                row.append(dval[i])
            row.append(restr[i])
            w.writerow([repr(float(v)) for v in row])
    E.diagnostics["function"] = cfg.function
    E.diagnostics["lam"] = list(lam)
    E.diagnostics["sample_restriction_error_max"] = float(restr.max()) if restr.size else 0.0
    E.diagnostics["E_K_error_max_on_samples"] = ek_err
    json_path = os.path.join(cfg.out, "extension.json")
    _write(json_path, report_json(E.to_dict()))
    print(f"samples: {csv_path}")
    print(f"extension: {json_path}")
    return 0


# ----------------------------------------------------------------------------
# norms


def cmd_norms(cfg: ExperimentConfig) -> int:
    f = cat.get(cfg.function, cfg.d)
    params = SmoothnessParams(cfg.alpha, cfg.p, cfg.theta)
    B = besov_norm_prime(f, params, cfg.K_t, cfg.n_avg)
    H = nikolskii_norm_prime(f, params, cfg.K_t, cfg.n_avg)
    out = {
        "schema": REPORT_SCHEMA,
        "type": "norm_report",
        "function": cfg.function,
        "config": cfg.serialize(),
        "besov_prime": B.to_dict(),
        "nikolskii_prime": H.to_dict(),
    }
    if np.isinf(cfg.theta):
        out["metadata"] = {"route": "theta = inf uses the Nikolskii norm"}
    if cfg.with_extension:
        if np.isinf(cfg.theta):
            raise ConfigError("the derivative seminorms need a finite theta")
        E = extend(f, cfg.alpha, cfg.p, cfg.theta, m=cfg.m, K=cfg.K_eff, order=cfg.order())
        rhs = B.total
        rows = []
        for lam in itertools.product(*(range(int(np.ceil(a))) for a in cfg.alpha)):
            if any(lj > mj for lj, mj in zip(lam, E.m)):
                continue
            rep = derivative_besov_norm(E, lam, params, cfg.K_t)
            for J, lhs in sorted(rep.contributions.items()):
                rows.append({"lam": list(lam), "J": J, "lhs": lhs, "rhs_norm": rhs, "ratio": lhs / rhs if rhs > 0 else 0.0})
        out["ratio_table"] = rows
        out["K"] = E.K
    path = os.path.join(cfg.out, "norms.json")
    _write(path, report_json(out))
    print(f"besov_prime = {B.total!r}")
    print(f"nikolskii_prime = {H.total!r}")
    print(f"report: {path}")
    return 0


# ----------------------------------------------------------------------------


COMMANDS = {"verify": cmd_verify, "extend": cmd_extend, "norms": cmd_norms}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mixext", description="Extension operators and mixed-smoothness norms on the unit cube.")
    ap.add_argument("command", nargs="?", choices=sorted(COMMANDS), help="what to run")
    ap.add_argument("--config", metavar="PATH", help="flat key = value configuration file")
    ap.add_argument("--seed", type=int, help="random seed (overrides the file)")
    ap.add_argument("--out", metavar="DIR", help="output directory (overrides the file)")
    ap.add_argument("--print-config", action="store_true", help="print the effective configuration and exit")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config, seed=args.seed, out=args.out)
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    if args.print_config:
        sys.stdout.write(cfg.serialize())
        return 0
    if args.command is None:
        build_parser().print_usage(sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](cfg)
    except (ConfigError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
