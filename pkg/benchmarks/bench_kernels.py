"""Compare the numba and numpy backends of the hot kernels.

Two measurements:

* the raw piecewise-polynomial kernel, both implementations called in one process;
* end-to-end evaluation of a blended spline family (d = 1, 2), run in child
  processes with and without ``MIXEXT_DISABLE_NUMBA`` so the import-time switch
  is exercised as in normal use.

Usage::

    python3 benchmarks/bench_kernels.py [--points N] [--repeat R]
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from mixext import _kernels

END_TO_END = r"""
import json, sys, time
import numpy as np
from mixext import _kernels
from mixext.catalog import get
from mixext.extension import global_detail, zero_extend
n, repeat = int(sys.argv[1]), int(sys.argv[2])
out = {"backend": _kernels.BACKEND}
for d in (1, 2):
    F = global_detail((4,) * d, (2,) * d, (2,) * d, zero_extend(get("sin", d)))
    X = np.random.default_rng(0).uniform(-2.0, 3.0, (n, d))
    F(X[:10])  # compile / warm up
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter(); v = F(X); best = min(best, time.perf_counter() - t)
    out[f"d{d}"] = {"seconds": best, "checksum": float(np.sum(v))}
print(json.dumps(out))
"""


def bench_piecewise(n: int, repeat: int) -> dict:
    rng = np.random.default_rng(1)
    table = rng.standard_normal((64, 4))
    x = rng.uniform(-1.0, 65.0, n)
    a = _kernels.piecewise_eval_numpy(table, x)
    res = {"max_abs_diff": None}
    res["numpy"] = min(timeit.repeat(lambda: _kernels.piecewise_eval_numpy(table, x), number=1, repeat=repeat))
    if _kernels.HAVE_NUMBA:
        b = _kernels.piecewise_eval_numba(table, x)
        res["max_abs_diff"] = float(np.abs(a - b).max())
        res["numba"] = min(timeit.repeat(lambda: _kernels.piecewise_eval_numba(table, x), number=1, repeat=repeat))
    return res


def bench_end_to_end(n: int, repeat: int) -> dict:
    out = {}
    for flag in ("0", "1"):
        env = dict(os.environ, MIXEXT_DISABLE_NUMBA=flag)
        proc = subprocess.run(
            [sys.executable, "-c", END_TO_END, str(n), str(repeat)], env=env, capture_output=True, text=True, check=True
        )
        rec = json.loads(proc.stdout)
        out[rec.pop("backend")] = rec
    return out


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    pw = bench_piecewise(args.points, args.repeat)
    print(f"piecewise kernel, {args.points} points")
    print(f"  numpy  {pw['numpy'] * 1e3:9.2f} ms")
    if "numba" in pw:
        print(f"  numba  {pw['numba'] * 1e3:9.2f} ms   speedup {pw['numpy'] / pw['numba']:.1f}x   max diff {pw['max_abs_diff']:.1e}")

    e2e = bench_end_to_end(args.points // 10, args.repeat)
    for d in ("d1", "d2"):
        print(f"family evaluation {d}, {args.points // 10} points")
        for backend, rec in e2e.items():
            print(f"  {backend:6s} {rec[d]['seconds'] * 1e3:9.2f} ms   checksum {rec[d]['checksum']!r}")
        if {"numpy", "numba"} <= e2e.keys():
            print(f"  speedup {e2e['numpy'][d]['seconds'] / e2e['numba'][d]['seconds']:.1f}x")


if __name__ == "__main__":
    main()
