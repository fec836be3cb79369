"""Acceptance criteria, one test per criterion.

Every test records a PASS/FAIL line (printed in the pytest terminal summary)
before asserting, so a failing criterion is still reported with its numbers.
"""
import filecmp
import itertools
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE
from mixext import catalog as cat
from mixext.analysis import (
    OracleEngine,
    SmoothnessParams,
    besov_norm_ell,
    besov_norm_prime,
    modulus_avg,
    modulus_sup,
    nikolskii_norm_prime,
)
from mixext.cli import main as cli_main
from mixext.config import DEFAULT_FUNCTIONS
from mixext.extension import (
    bernstein_experiment,
    class_check_Pprime,
    global_detail,
    global_local_projector,
    global_local_projector_factored,
    zero_extend,
)
from mixext.index import Box, IntBox
from mixext.polyproj import MaskOp, ProjectorOp, TensorPoly, masked_project, ortho_basis, project, tensor_apply
from mixext.quasiinterp import derivative_level_bound_report, lp_error, quasi_interp_E, telescoped_E
from mixext.splines import eval_g, eval_psi, refinement_coeffs
from mixext.verify import main_theorem_table, stability_report

SEED = 2024
MINUTE = 60.0
ALPHA = 1.5


def record(key, passed, detail):
    ACCEPTANCE[key] = (bool(passed), detail)
    return passed


def slope(xs, ys):
    return float(np.polyfit(np.asarray(xs, float), np.log2(np.asarray(ys, float)), 1)[0])


def small_m(d):
    return list(itertools.product(range(3), repeat=d))


# ----------------------------------------------------------------------------
# 1. exact identities (d <= 2, kappa <= 4, m <= (2, 2)), each under a minute


def test_1a_refinement_and_parity():
    t0 = time.perf_counter()
    rng = np.random.default_rng([SEED, 1])
    exact = all(refinement_coeffs(m).parity_sums() == (Fraction(1), Fraction(1)) for m in range(3))
    fl = max(abs(float(np.sum(refinement_coeffs(m).coeffs[s::2])) - 1.0) for m in range(3) for s in (0, 1))
    worst = 0.0
    for m in range(3):
        x = rng.uniform(-0.5, m + 1.5, 1000)
        a = refinement_coeffs(m).coeffs
        rhs = sum(a[mu] * eval_psi(m, 0, 2 * x - mu) for mu in range(m + 2))
        worst = max(worst, float(np.abs(eval_psi(m, 0, x) - rhs).max()))
    dt = time.perf_counter() - t0
    ok = exact and fl <= 1e-12 and worst <= 1e-10 and dt < MINUTE
    record("1a", ok, f"parity sums exact={exact} float_err={fl:.1e} refinement_err={worst:.1e} ({dt:.1f}s)")
    assert ok


def test_1b_partition_of_unity():
    t0 = time.perf_counter()
    rng = np.random.default_rng([SEED, 2])
    worst = 0.0
    for d in (1, 2):
        for m in small_m(d):
            for kappa in itertools.product(range(5), repeat=d):
                x = rng.random((1000, d))
                s = sum(eval_g(kappa, nu, m, x) for nu in IntBox(tuple(-v for v in m), tuple(2**k - 1 for k in kappa)))
                worst = max(worst, float(np.abs(s - 1).max()))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-10 and dt < MINUTE
    record("1b", ok, f"max |sum g - 1| = {worst:.1e} over 1000 points per (d, m, kappa) ({dt:.1f}s)")
    assert ok


def test_1c_projector_reproduction_and_kernel():
    t0 = time.perf_counter()
    rng = np.random.default_rng([SEED, 3])
    rep, ker = 0.0, 0.0
    for d in (1, 2):
        for _ in range(50):
            l = tuple(int(v) for v in rng.integers(0, 3, d))
            box = Box(tuple(rng.uniform(-1, 1, d)), tuple(rng.uniform(0.05, 2, d)))
            p = TensorPoly(box, rng.standard_normal(tuple(v + 1 for v in l)))
            X = np.asarray(box.corner) + np.asarray(box.edge) * rng.uniform(-0.5, 1.5, (100, d))
            rep = max(rep, float(np.abs(project(p, box, l)(X) - p(X)).max()))
            j = int(rng.integers(d))

            def q(Y, j=j, box=box, hi=l[j] + 1):
                return ortho_basis(hi)((Y[..., j] - box.corner[j]) / box.edge[j])[..., hi]

            ker = max(ker, float(np.abs(project(q, box, l).coef).max()))
    dt = time.perf_counter() - t0
    ok = rep <= 1e-10 and ker <= 1e-10 and dt < MINUTE
    record("1c", ok, f"reproduction err={rep:.1e} kernel coef={ker:.1e} ({dt:.1f}s)")
    assert ok


def test_1d_tensorization_and_masked_projector():
    t0 = time.perf_counter()
    rng = np.random.default_rng([SEED, 4])
    swap, fac, mask = 0.0, 0.0, 0.0
    for _ in range(20):
        f = cat.random_trig(2, rng)
        a0, a1 = rng.uniform(-0.5, 1.0, 2)
        ops = [ProjectorOp(a0, 0.5, 2), MaskOp(0.0, 1.0) @ ProjectorOp(a1, 0.25, 1)]
        X = rng.uniform(-0.5, 1.5, (100, 2))
        swap = max(swap, float(np.abs(tensor_apply(ops, f, order=(0, 1))(X) - tensor_apply(ops, f, order=(1, 0))(X)).max()))
        kappa = tuple(int(v) for v in rng.integers(0, 5, 2))
        nu = tuple(int(rng.integers(0, 2**k)) for k in kappa)
        m = tuple(int(v) for v in rng.integers(1, 3, 2))
        X = rng.uniform(-3.0, 4.0, (100, 2))
        g = zero_extend(f)
        fac = max(fac, float(np.abs(global_local_projector(kappa, nu, (1, 1), m, g)(X)
                                     - global_local_projector_factored(kappa, nu, (1, 1), m, g)(X)).max()))
        # masked projector equals the tensor product of 1-D masked projectors (polynomial f: exact quadrature)
        poly = lambda Y: (1 + Y[..., 0] ** 2) * (Y[..., 1] ** 3 - Y[..., 1])
        pb, mb = Box((a0, a1), (0.5, 0.25)), Box((0.0, 0.0), (1.0, 1.0))
        lhs = masked_project(poly, pb, mb, (1, 2))(X)
        rhs = tensor_apply([MaskOp(0, 1) @ ProjectorOp(a0, 0.5, 1), MaskOp(0, 1) @ ProjectorOp(a1, 0.25, 2)], poly)(X)
        mask = max(mask, float(np.abs(lhs - rhs).max()))
    dt = time.perf_counter() - t0
    ok = max(swap, fac, mask) <= 1e-10 and dt < MINUTE
    record("1d", ok, f"order swap={swap:.1e} factored projector={fac:.1e} masked={mask:.1e} ({dt:.1f}s)")
    assert ok


def test_1e_telescoping_and_global_cube_consistency():
    t0 = time.perf_counter()
    rng = np.random.default_rng([SEED, 5])
    tel, cons = 0.0, 0.0
    for d in (1, 2):
        Kmax = 4 if d == 1 else 3
        for m in [(1,) * d, (2,) * d]:
            l = (2,) * d
            f = cat.random_trig(d, rng)
            X = rng.random((300, d))
            for K in range(Kmax + 1):
                s = sum(telescoped_E(k, l, m, f)(X) for k in itertools.product(range(K + 1), repeat=d))
                tel = max(tel, float(np.abs(s - quasi_interp_E((K,) * d, l, m, f)(X)).max()))
            for kappa in itertools.product(range(Kmax + 1), repeat=d):
                a = global_detail(kappa, l, m, zero_extend(f))(X)
                cons = max(cons, float(np.abs(a - telescoped_E(kappa, l, m, f)(X)).max()))
    dt = time.perf_counter() - t0
    ok = tel <= 1e-10 and cons <= 1e-10 and dt < MINUTE
    record("1e", ok, f"telescoping={tel:.1e} global vs cube detail={cons:.1e} ({dt:.1f}s)")
    assert ok


def test_1f_global_details_in_boundary_class():
    t0 = time.perf_counter()
    rng = np.random.default_rng([SEED, 6])
    bad, count, worst = 0, 0, 0.0
    for i in range(100):
        d = 1 + i % 2
        f = zero_extend(cat.random_trig(d, rng))
        levels = range(5) if d == 1 else range(4)
        for kappa in itertools.product(levels, repeat=d):
            res = class_check_Pprime(global_detail(kappa, (2,) * d, (2,) * d, f))
            bad += not res.passed
            worst = max(worst, res.max_deviation / max(res.scale, 1.0))
            count += 1
    dt = time.perf_counter() - t0
    ok = bad == 0 and dt < MINUTE
    record("1f", ok, f"{bad} violations in {count} details of 100 oracles, worst rel dev {worst:.1e} ({dt:.1f}s)")
    assert ok


# ----------------------------------------------------------------------------
# 2. scaling laws


def test_2a_jackson_slope():
    rows = {}
    ks = [3, 4, 5, 6]  # level 2 is still pre-asymptotic for the oscillating entries
    for d in (1, 2):
        for c in cat.catalog(d):
            if np.isfinite(min(c.smoothness(2.0))):
                continue  # C-infinity entries only
            for p in (1.0, 2.0):
                errs = [lp_error(c, quasi_interp_E((k,) * d, (2,) * d, (2,) * d, c), p) for k in ks]
                if max(errs) < 1e-12:
                    continue  # reproduced exactly
                rows[f"d{d}:{c.name}:p{int(p)}"] = slope(ks, errs)
    dev = {k: abs(v + 2.0) for k, v in rows.items()}
    ok = bool(rows) and max(dev.values()) <= 0.3
    worst = max(dev, key=dev.get)
    record("2a", ok, f"{len(rows)} slopes, target -2 (= -min l), worst {worst} slope {rows[worst]:.3f}")
    assert ok


def test_2b_bernstein_slope():
    ks = [2, 3, 4, 5]
    rows = {}
    for d in (1, 2):
        for q in (2.0, np.inf):
            for lam in itertools.product(range(3), repeat=d):
                for j in range(d):
                    levels = [tuple(k if i == j else 2 for i in range(d)) for k in ks]
                    rng = np.random.default_rng([SEED, 7, d, j, *lam, int(np.isinf(q))])
                    res = bernstein_experiment(levels, (1,) * d, (2,) * d, lam, q, 40, rng)
                    rows[(d, q, lam, j)] = slope(ks, [r["max_ratio"] for r in res["levels"]]) - lam[j]
    worst = max(rows, key=lambda k: abs(rows[k]))
    ok = all(abs(v) <= 0.5 for v in rows.values())
    record("2b", ok, f"{len(rows)} per-axis slopes, worst deviation {rows[worst]:+.3f} at (d, q, lam, axis)={worst}")
    assert ok


def test_2c_detail_derivative_ratio():
    spread = {}
    for name in ("sin", "exp_sin", "abs25"):
        g = cat.get(name, 1)
        for lam in (0, 1):
            r = [derivative_level_bound_report(g, (k,), (lam,), 2.0, 2.0, (2,), (2,))["ratio"] for k in range(1, 6)]
            spread[f"{name}[{lam}]"] = max(r) / min(r)
    worst = max(spread, key=spread.get)
    ok = all(v < 10 for v in spread.values())
    record("2c", ok, f"max/min ratio across levels 1..5, worst {worst} = {spread[worst]:.2f}")
    assert ok


# ----------------------------------------------------------------------------
# 3. main inequality: ratio of extension seminorms to the cube norm


PARAM_SETS = [(1, (3, 4, 5)), (2, (2, 3, 4))]


@pytest.mark.slow
@pytest.mark.parametrize("d, Ks", PARAM_SETS, ids=["d1", "d2"])
def test_3_main_theorem(d, Ks):
    t0 = time.perf_counter()
    rows = main_theorem_table(d, (ALPHA,) * d, 2.0, 2.0, None, Ks, DEFAULT_FUNCTIONS, 8, 6)
    dt = time.perf_counter() - t0
    finite = bool(rows) and all(np.all(np.isfinite(r["ratio"])) for r in rows.values())
    stab = stability_report(rows)
    bound = max(max(r["ratio"]) for r in rows.values())
    worst = max(stab["change"], key=stab["change"].get)
    nonincr = sum(stab["monotone"].values())
    ok = finite and stab["passed"] and dt < 10 * MINUTE
    record(
        f"3.d{d}",
        ok,
        f"(i) finite={finite} (ii) last-step change max {stab['change'][worst]:.1%} at {worst} (limit 10%), "
        f"nonincreasing {nonincr}/{len(stab['monotone'])} (iii) constant {bound:.1f}; K={list(Ks)} ({dt:.0f}s)",
    )
    assert finite, "ratio not finite"
    assert stab["passed"], f"ratios not stable within 10%: {stab['change']}"


# ----------------------------------------------------------------------------
# 4. embeddings


def test_4_embeddings():
    v_mod, v_h, v_b, n_mod, n_norm = 0, 0, 0, 0, 0
    for d in (1, 2):
        params = SmoothnessParams((ALPHA,) * d, 2.0, 2.0)
        l = params.l
        c4 = float(np.prod([2.0 ** (2 + a) for a in params.alpha]))
        for c in cat.catalog(d):
            eng = OracleEngine(c, d, 2.0)
            for J in [(0,), (d - 1,), tuple(range(d))]:
                order = tuple(l[j] if j in J else 0 for j in range(d))
                for k in range(1, 5):
                    t = tuple(2.0 ** (1 - k) if j in J else 0.0 for j in range(d))
                    a = modulus_avg(None, order, t, 2.0, d, 6, engine=eng).value
                    b = modulus_sup(None, order, t, 2.0, d, 9, 6, engine=eng).value
                    v_mod += a > b
                    n_mod += 1
            if min(c.smoothness(2.0)) <= ALPHA:
                continue
            B = besov_norm_prime(c, params, engine=eng).total
            H = nikolskii_norm_prime(c, params, engine=eng).total
            Bl = besov_norm_ell(c, c.derivative, params).total
            v_h += H > c4 * B
            v_b += B > Bl * (1 + 1e-9)
            n_norm += 1
    ok = v_mod == 0 and v_h == 0 and v_b == 0
    record("4", ok, f"violations: Omega'<=Omega {v_mod}/{n_mod}, H'<=c4 B' {v_h}/{n_norm}, B'<=B^ell {v_b}/{n_norm}")
    assert ok


# ----------------------------------------------------------------------------
# 5. difference-derivative bound


def test_5_difference_derivative_bound():
    rng = np.random.default_rng([SEED, 9])
    viol, pairs, worst = 0, 0, 0.0
    for d in (1, 2):
        l = (2,) * d
        for c in cat.catalog(d):
            if not c.has_derivative(l, 2.0):
                continue
            rhs_norm = OracleEngine(c.derivative(l), d, 2.0).lp_norm()
            eng = OracleEngine(c, d, 2.0)
            for _ in range(100):
                h = tuple(float(v) for v in rng.uniform(-0.45, 0.45, d))
                lhs = eng.diff_norm(l, h)
                rhs = float(np.prod(np.abs(h) ** np.asarray(l))) * rhs_norm
                viol += lhs > rhs * (1 + 1e-9) + 1e-12
                worst = max(worst, lhs / rhs if rhs > 0 else 0.0)
                pairs += 1
    ok = viol == 0
    record("5", ok, f"{viol} violations in {pairs} (f, h) pairs, max lhs/rhs {worst:.3f}")
    assert ok


# ----------------------------------------------------------------------------
# 6. determinism of the verify command


def test_6_verify_is_deterministic(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("d = 1\nsuites = index,splines,polyproj,quasiinterp,extension,class_check,analysis\n")
    outs = []
    for i in range(2):
        out = tmp_path / "out"
        code = cli_main(["verify", "--config", str(cfg), "--seed", "7", "--out", str(out)])
        target = tmp_path / f"report{i}.json"
        (out / "verify_report.json").replace(target)
        outs.append((code, target))
    capsys.readouterr()
    same = filecmp.cmp(outs[0][1], outs[1][1], shallow=False)
    ok = same and outs[0][0] == outs[1][0]
    record("6", ok, f"two runs with seed 7: byte-identical={same}, exit codes {outs[0][0]}, {outs[1][0]}")
    assert ok
