"""Verification suites run by ``mixext verify``.

Each suite returns a mapping ``check name -> record`` where every record has a
boolean ``passed`` plus the measured quantities. Reports hold no timings and
all random draws come from generators seeded by the configuration, so equal
configurations give byte-identical reports.
"""
from __future__ import annotations

import itertools
import json
from fractions import Fraction
from typing import Callable

import numpy as np

from . import catalog as cat
from .analysis import (
    OracleEngine,
    SmoothnessParams,
    besov_norm_ell,
    besov_norm_prime,
    derivative_besov_norm,
    l_of_alpha,
    mixed_difference,
    modulus_avg,
    modulus_sup,
    nikolskii_norm_prime,
)
from .config import ConfigError, ExperimentConfig
from .extension import (
    bernstein_experiment,
    class_check_Pprime,
    extend,
    global_detail,
    global_local_projector,
    global_local_projector_factored,
    pprime_perturbed,
    random_pprime,
    zero_extend,
)
from .index import Box, IntBox, binary_masks, dyadic_cell, indicator_vector, leq, support_set
from .piecewise import PiecewisePoly, support_box_Qm
from .polyproj import (
    IdentityOp,
    ProjectorOp,
    TensorPoly,
    gauss_legendre,
    ortho_basis,
    project,
    tensor_apply,
)
from .quasiinterp import (
    _clamp1,
    cell_geometry,
    derivative_level_bound_report,
    index_clamp,
    lp_error,
    quasi_interp_E,
    telescoped_E,
)
from .splines import eval_g, eval_psi, refinement_coeffs

__all__ = ["SUITES", "run_suite", "run_verify", "report_json", "slope", "main_theorem_table", "stability_report"]

REPORT_SCHEMA = 1


def _rec(passed: bool, **values) -> dict:
    out = {"passed": bool(passed)}
    out.update(values)
    return out


def slope(levels, values) -> float:
    """Least-squares slope of ``log2(values)`` against ``levels``."""
    y = np.log2(np.asarray(values, dtype=float))
    return float(np.polyfit(np.asarray(levels, dtype=float), y, 1)[0])


def _rand_trig(d: int, rng: np.random.Generator, max_freq: float = 4.0) -> Callable:
    return cat.random_trig(d, rng, nterms=3, max_freq=max_freq)


# ----------------------------------------------------------------------------
# core-index


def suite_index(cfg: ExperimentConfig) -> dict:
    rng = np.random.default_rng([cfg.seed, 1])
    ok = True
    for _ in range(200):
        d = int(rng.integers(1, 5))
        x = tuple(int(v) for v in rng.integers(-2, 3, d))
        y = tuple(int(v) for v in rng.integers(-2, 3, d))
        if leq(x, y) and leq(y, x) and x != y:
            ok = False
    count_ok = True
    for _ in range(50):
        d = int(rng.integers(1, 4))
        lo = tuple(int(v) for v in rng.integers(-3, 2, d))
        hi = tuple(int(v) for v in rng.integers(-1, 4, d))
        expect = int(np.prod([max(h - l + 1, 0) for l, h in zip(lo, hi)]))
        count_ok &= len(list(IntBox(lo, hi))) == expect
    bij = True
    for d in range(1, 7):
        seen = set()
        for J in itertools.chain.from_iterable(itertools.combinations(range(d), r) for r in range(d + 1)):
            e = indicator_vector(J, d)
            bij &= support_set(e) == frozenset(J)
            seen.add(e)
        bij &= seen == set(binary_masks(d))
    return {
        "order_antisymmetry": _rec(ok),
        "intbox_count": _rec(count_ok),
        "indicator_bijection": _rec(bij, max_d=6),
    }


# ----------------------------------------------------------------------------
# splines


def suite_splines(cfg: ExperimentConfig) -> dict:
    rng = np.random.default_rng([cfg.seed, 2])
    out = {}
    worst = 0.0
    for m in range(5):
        x = rng.uniform(-0.5, m + 1.5, 1000)
        a = refinement_coeffs(m)
        rhs = sum(a[mu] * eval_psi(m, 0, 2 * x - mu) for mu in range(m + 2))
        worst = max(worst, float(np.abs(eval_psi(m, 0, x) - rhs).max()))
    out["refinement_identity"] = _rec(worst <= 1e-10, max_error=worst, tol=1e-10)
    exact = all(refinement_coeffs(m).parity_sums() == (Fraction(1), Fraction(1)) for m in range(8))
    fl = max(abs(float(np.sum(refinement_coeffs(m).coeffs[s::2])) - 1.0) for m in range(8) for s in (0, 1))
    out["mask_parity_sums"] = _rec(exact and fl <= 1e-14, exact=exact, float_error=fl)
    worst = 0.0
    for d in (1, 2):
        for m in itertools.product(range(3), repeat=d):
            for kappa in itertools.product(range(4), repeat=d):
                x = rng.random((1000, d))
                s = np.zeros(1000)
                for nu in IntBox(tuple(-v for v in m), tuple(2**k - 1 for k in kappa)):
                    s += eval_g(kappa, nu, m, x)
                worst = max(worst, float(np.abs(s - 1).max()))
    out["partition_of_unity"] = _rec(worst <= 1e-10, max_error=worst, tol=1e-10)
    # derivative sup norms on matched grids
    worst = 0.0
    u = np.linspace(0.0, 1.0, 257)[:-1] + 1.0 / 512
    for m in range(1, 4):
        for lam in range(m + 1):
            for kappa, nu in ((0, 0), (2, 1), (3, -1)):
                ref = np.abs(eval_psi(m, lam, u * (m + 1))).max()
                xs = (nu + u * (m + 1)) / 2.0**kappa
                val = np.abs(eval_g((kappa,), (nu,), (m,), xs[:, None], lam=(lam,))).max()
                worst = max(worst, abs(val / (2.0 ** (kappa * lam) * ref) - 1.0))
    out["derivative_sup_scaling"] = _rec(worst <= 1e-8, max_rel_error=worst, tol=1e-8)
    sign_ok = True
    for m in range(5):
        x = rng.uniform(-1.0, m + 2.0, 2000)
        v = eval_psi(m, 0, x)
        inside = (x > 0) & (x < m + 1)
        # near the ends of the support values are tiny; allow roundoff there
        core = (x > 1e-3) & (x < m + 1 - 1e-3)
        sign_ok &= bool(np.all(v[core] > 0) and np.all(v[inside] >= -1e-15) and np.all(v[~inside] == 0))
    out["positivity_and_support"] = _rec(sign_ok)
    return out


# ----------------------------------------------------------------------------
# polyproj


def suite_polyproj(cfg: ExperimentConfig) -> dict:
    rng = np.random.default_rng([cfg.seed, 3])
    out = {}
    g = max(float(np.abs(ortho_basis(l).gram(l + 3) - np.eye(l + 1)).max()) for l in range(11))
    out["orthonormality"] = _rec(g <= 1e-12, max_error=g, tol=1e-12)
    unit = Box((0.0,), (1.0,))
    P = project(lambda X: X[..., 0] ** 2, unit, 1)
    xs = np.linspace(0, 1, 11)[:, None]
    e = float(np.abs(P(xs) - (xs[:, 0] - 1.0 / 6.0)).max())
    out["projection_of_square"] = _rec(e <= 1e-12, max_error=e)
    worst_rep, worst_ker = 0.0, 0.0
    for d in (1, 2):
        for _ in range(10):
            l = tuple(int(v) for v in rng.integers(0, 4, d))
            box = Box(tuple(rng.uniform(-1, 1, d)), tuple(rng.uniform(0.1, 2, d)))
            p = TensorPoly(box, rng.standard_normal(tuple(v + 1 for v in l)))
            X = box.corner + box.edge * rng.random((50, d))
            worst_rep = max(worst_rep, float(np.abs(project(p, box, l)(X) - p(X)).max()))
            # an orthogonal basis function of too high degree is annihilated
            j = int(rng.integers(d))
            hi = l[j] + 1

            def q(Y, j=j, hi=hi, box=box):
                u = (Y[..., j] - box.corner[j]) / box.edge[j]
                return ortho_basis(hi)(u)[..., hi]

            worst_ker = max(worst_ker, float(np.abs(project(q, box, l).coef).max()))
    out["projector_reproduction"] = _rec(worst_rep <= 1e-10, max_error=worst_rep)
    out["projector_kernel"] = _rec(worst_ker <= 1e-12, max_error=worst_ker)
    # kernel property for a smooth oracle: P(f - Pf) = 0
    f = _rand_trig(2, rng)
    box = Box((0.1, -0.3), (0.5, 0.8))
    Pf = project(f, box, (2, 1))
    resid = project(lambda X: f(X) - Pf(X), box, (2, 1))
    k = float(np.abs(resid.coef).max())
    out["projector_idempotent_residual"] = _rec(k <= 1e-10, max_error=k)
    # tensorization: axis order does not matter, and masked projector factors
    worst_swap, worst_fac = 0.0, 0.0
    for _ in range(10):
        f = _rand_trig(2, rng)
        ops = [ProjectorOp(0.0, 0.5, 2), ProjectorOp(0.25, 0.5, 1)]
        X = rng.uniform(-0.5, 1.5, (40, 2))
        a = tensor_apply(ops, f, order=(0, 1))(X)
        b = tensor_apply(ops, f, order=(1, 0))(X)
        worst_swap = max(worst_swap, float(np.abs(a - b).max()))
        kappa = tuple(int(v) for v in rng.integers(0, 3, 2))
        nu = tuple(int(rng.integers(0, 2**k)) for k in kappa)
        X = rng.uniform(-3.5, 4.5, (60, 2))
        direct = global_local_projector(kappa, nu, (1, 2), (2, 2), f)(X)
        fact = global_local_projector_factored(kappa, nu, (1, 2), (2, 2), f)(X)
        worst_fac = max(worst_fac, float(np.abs(direct - fact).max()))
    bil = lambda X: 1 + X[..., 0] - 2 * X[..., 1] + 3 * X[..., 0] * X[..., 1]
    X = rng.random((30, 2))
    rep = float(np.abs(tensor_apply([ProjectorOp(0, 1, 1), ProjectorOp(0, 1, 1)], bil)(X) - bil(X)).max())
    ident = float(np.abs(tensor_apply([IdentityOp(), IdentityOp()], bil)(X) - bil(X)).max())
    out["tensor_order_swap"] = _rec(worst_swap <= 1e-12, max_error=worst_swap, tol=1e-12)
    out["tensor_bilinear_reproduction"] = _rec(rep <= 1e-12 and ident == 0.0, max_error=rep)
    out["masked_projector_factorization"] = _rec(worst_fac <= 1e-10, max_error=worst_fac, tol=1e-10)
    # Jackson decay for sin(pi x), l = 1 (linear fits)
    f = lambda X: np.sin(np.pi * X[..., 0])
    ks = list(range(1, 7))
    errs = []
    for k in ks:
        n = 2**k
        acc = 0.0
        for c in range(n):
            bx = Box((c / n,), (1.0 / n,))
            Pf = project(f, bx, 1, order=8)
            xg, wg = gauss_legendre(10)
            xx = (c + xg) / n
            acc += float(np.sum(wg / n * (np.sin(np.pi * xx) - Pf(xx[:, None])) ** 2))
        errs.append(np.sqrt(acc))
    s = -slope(ks, errs)
    out["jackson_projector_slope"] = _rec(1.8 <= s <= 2.2, slope=s, window=[1.8, 2.2])
    # projector boundedness and polynomial scale inequality across box sizes
    ratios = {}
    fs = [_rand_trig(1, np.random.default_rng([cfg.seed, 30, i]), max_freq=6.0) for i in range(20)]
    for p in (1.0, 2.0, 4.0):
        per_k = []
        for k in range(7):
            e = 2.0**-k
            best = 0.0
            for i, fi in enumerate(fs):
                a = np.random.default_rng([cfg.seed, 31, i, k]).uniform(0, 1 - e)
                bx = Box((a,), (e,))
                num = project(fi, bx, 1, order=8).lp_norm(p, order=12)
                den = _oracle_lp(fi, bx, p)
                best = max(best, num / den)
            per_k.append(best)
        ratios[str(p)] = max(per_k) / min(per_k)
    worst = max(ratios.values())
    out["projector_bounded_across_scales"] = _rec(worst < 1.1, max_over_min=ratios, limit=1.1)
    mk = {}
    for p, q in ((2.0, 2.0), (1.0, 4.0), (4.0, 1.0)):
        per = []
        for k in range(7):
            dl = 2.0**-k
            rr = np.random.default_rng([cfg.seed, 32])
            best = 0.0
            for _ in range(20):
                poly = TensorPoly(Box((0.3,), (dl,)), rr.standard_normal(4))
                num = poly.derivative((1,)).lp_norm(q, order=12) * dl ** (1 + 1 / p - 1 / q)
                best = max(best, num / poly.lp_norm(p, order=12))
            per.append(best)
        mk[f"{p},{q}"] = max(per) / min(per)
    out["polynomial_scale_inequality"] = _rec(max(mk.values()) < 1.1, max_over_min=mk, limit=1.1)
    return out


def _oracle_lp(f, box: Box, p: float, n: int = 12) -> float:
    x, w = gauss_legendre(n)
    grids = [box.corner[j] + box.edge[j] * x for j in range(box.d)]
    X = np.stack(np.meshgrid(*grids, indexing="ij"), axis=-1)
    v = np.abs(f(X))
    W = np.ones(())
    for j in range(box.d):
        W = np.multiply.outer(W, w * box.edge[j])
    return float(np.sum(W * v**p) ** (1 / p))


# ----------------------------------------------------------------------------
# quasiinterp


def _contains(A: Box, B: Box, tol: float = 1e-12) -> bool:
    return all(a - tol <= b and bu <= au + tol for a, b, au, bu in zip(A.corner, B.corner, A.upper, B.upper))


def suite_quasiinterp(cfg: ExperimentConfig) -> dict:
    rng = np.random.default_rng([cfg.seed, 4])
    out = {}
    ex = [index_clamp((0,), (2,), (-1,)), index_clamp((3,), (1,), (-1,)), index_clamp((3,), (1,), (7,))]
    mono = all(
        _clamp1(k, m, v) <= _clamp1(k, m, v + 1) for k in range(5) for m in range(3) for v in range(-m, 2**k - 1)
    )
    out["index_clamp"] = _rec(ex == [(0,), (0,), (6,)] and mono, examples=[list(e) for e in ex])
    # geometry: boxes are products, so the per-axis intervals decide every
    # containment in any dimension; the loops cover every axis configuration
    # with m <= 2, kappa <= 4.
    unit = Box((0.0,), (1.0,))
    bad, total, overlap = 0, 0, 0
    for m in range(3):
        for k in range(5):
            for cell in range(2**k):
                geo = cell_geometry((k,), (cell,), (m,))
                D, Dw = geo.D, geo.D_wide
                checks = [_contains(unit, D), _contains(D, geo.Q), _contains(Dw, D), _contains(unit, Dw)]
                nus = range(cell - m, cell + 1)
                for nu in nus:
                    c = _clamp1(k, m, nu)
                    checks.append(_contains(D, cell_geometry((k,), (c,), (0,)).D))
                    checks.append(_contains(Dw, cell_geometry((k,), (c,), (0,)).D))
                    if k >= 1:
                        for rho in range(-m, 2 ** (k - 1)):
                            if 0 <= nu - 2 * rho <= m + 1:
                                checks.append(_contains(Dw, cell_geometry((k - 1,), (_clamp1(k - 1, m, rho),), (0,)).D))
                bad += sum(not c for c in checks)
                total += len(checks)
                overlap = max(overlap, len(nus))
    out["cell_geometry_containments"] = _rec(bad == 0, violations=bad, checked=total)
    out["overlap_count"] = _rec(overlap <= 3, max_count=overlap, bound="prod(m_j + 1)")
    # polynomial reproduction and telescoping in d = 1, 2
    worst_rep, worst_tel, worst_zero = 0.0, 0.0, 0.0
    for d in (1, 2):
        l = (2,) * d
        m = (2, 1)[:d]
        poly = lambda X: np.prod(1.0 + np.arange(1, X.shape[-1] + 1) * X, axis=-1)
        X = rng.random((200, d))
        for kappa in [(0,) * d, (2,) * d, (3, 1)[:d]]:
            worst_rep = max(worst_rep, float(np.abs(quasi_interp_E(kappa, l, m, poly)(X) - poly(X)).max()))
            if any(kappa):
                worst_zero = max(worst_zero, float(np.abs(telescoped_E(kappa, l, m, poly)(X)).max()))
        f = _rand_trig(d, rng)
        K = 3
        s = np.zeros(len(X))
        for kappa in itertools.product(range(K + 1), repeat=d):
            s += telescoped_E(kappa, l, m, f)(X)
        worst_tel = max(worst_tel, float(np.abs(s - quasi_interp_E((K,) * d, l, m, f)(X)).max()))
    out["E_reproduces_polynomials"] = _rec(worst_rep <= 1e-10, max_error=worst_rep)
    out["telescoping_sum"] = _rec(worst_tel <= 1e-10, max_error=worst_tel)
    out["details_vanish_on_polynomials"] = _rec(worst_zero <= 1e-10, max_error=worst_zero)
    # Jackson rate of E for sin(2 pi x), l = 2
    f = lambda X: np.sin(2 * np.pi * X[..., 0])
    ks = list(range(2, 7))
    errs = [lp_error(f, quasi_interp_E((k,), (2,), (2,), f), 2.0) for k in ks]
    s = -slope(ks, errs)
    out["E_jackson_slope"] = _rec(1.7 <= s <= 2.3, slope=s, window=[1.7, 2.3], errors=errs)
    mono = True
    for name in ("sin", "exp_sin", "abs15"):
        g = cat.get(name, 1)
        e = [lp_error(g, quasi_interp_E((k,), (2,), (2,), g), 2.0) for k in (2, 3, 4)]
        mono &= e[0] > e[1] > e[2]
    out["E_convergence_monotone"] = _rec(mono)
    # detail-derivative bound: ratio lhs / rhs stable across levels
    g = cat.get("sin", 1)
    ratios = [derivative_level_bound_report(g, (k,), (0,), 2.0, 2.0, (2,), (2,))["ratio"] for k in range(1, 6)]
    spread = max(ratios) / min(ratios)
    out["detail_bound_ratio"] = _rec(spread < 10, ratios=ratios, max_over_min=spread, limit=10)
    reps = [derivative_level_bound_report(g, (k,), (1,), 2.0, 2.0, (2,), (2,)) for k in range(2, 6)]
    lhs_slope = slope(range(2, 6), [r["lhs"] for r in reps])
    mod_slope = slope(range(2, 6), [r["modulus"] for r in reps])
    dev = abs(lhs_slope - (1 + mod_slope))
    out["detail_derivative_scaling"] = _rec(dev <= 0.3, lhs_slope=lhs_slope, modulus_slope=mod_slope, deviation=dev)
    return out


# ----------------------------------------------------------------------------
# extension


def suite_extension(cfg: ExperimentConfig) -> dict:
    rng = np.random.default_rng([cfg.seed, 5])
    d = cfg.d
    out = {}
    f = _rand_trig(d, rng)
    If = zero_extend(f)
    X = rng.uniform(-0.5, 1.5, (400, d))
    inside = np.all((X >= 0) & (X <= 1), axis=1)
    ze = bool(np.all(If(X)[inside] == f(X[inside])) and np.all(If(X)[~inside] == 0))
    out["zero_extension"] = _rec(ze)
    m = (2,) * d
    l = (2,) * d
    worst = 0.0
    for name in cfg.functions:
        if name not in [c.name for c in cat.catalog(d)]:
            continue
        g = cat.get(name, d)
        Xc = rng.random((200, d))
        for kappa in [(0,) * d, (1,) * d, (2, 1)[:d], (3,) * d]:
            a = global_detail(kappa, l, m, zero_extend(g))(Xc)
            b = telescoped_E(kappa, l, m, g)(Xc)
            worst = max(worst, float(np.abs(a - b).max()))
    out["global_cube_consistency"] = _rec(worst <= 1e-10, max_error=worst)
    # the whole-space local projector of If agrees with the cell projector inside the cube
    kappa = (2,) * d
    nu = (1,) * d
    Xc = dyadic_cell((0,) * d, (0,) * d).corner + rng.random((100, d))
    from .quasiinterp import local_projector_S

    a = global_local_projector(kappa, nu, (1,) * d, m, If)(Xc)
    b = local_projector_S(kappa, nu, (1,) * d, (0,) * d, f)(Xc)
    e = float(np.abs(a - b).max())
    out["global_projector_on_cube"] = _rec(e <= 1e-10, max_error=e)
    # support and restriction
    K = min(cfg.K_eff, 3 if d == 2 else 5)
    E = extend(f, cfg.alpha, cfg.p, cfg.theta, m=cfg.m, K=K)
    W = support_box_Qm(E.m)
    Xo = np.concatenate([W.upper + rng.random((50, d)), np.asarray(W.corner) - 1 - rng.random((50, d))])
    outside = float(np.abs(E(Xo)).max())
    out["vanishes_outside_support_box"] = _rec(outside == 0.0, max_value=outside)
    T = E.total()
    e1 = lp_error(f, T.copy_with(T.coef, cube_only=True), cfg.p)
    e2 = lp_error(f, quasi_interp_E((K,) * d, E.l, E.m, f), cfg.p)
    out["restriction_equals_E_K"] = _rec(abs(e1 - e2) <= 1e-10 * max(1.0, e2), ext_error=e1, E_error=e2)
    errs = []
    for k in range(K + 1):
        Ek = extend(f, cfg.alpha, cfg.p, cfg.theta, m=cfg.m, K=k).total()
        errs.append(lp_error(f, Ek.copy_with(Ek.coef, cube_only=True), cfg.p))
    # early levels are pre-asymptotic for oscillating f; the tail must decrease
    tail = errs[-3:]
    out["restriction_error_decreasing"] = _rec(all(a > b for a, b in zip(tail, tail[1:])), errors=errs)
    poly = lambda Y: 1.0 + Y[..., 0] - 0.5 * Y[..., -1]
    Ep = extend(poly, cfg.alpha, cfg.p, cfg.theta, m=cfg.m, K=2)
    hi = max(float(np.abs(F.coef).max()) for k, F in Ep.details.items() if any(k))
    out["polynomial_higher_details_vanish"] = _rec(hi <= 1e-10, max_coefficient=hi)
    # the coefficients of a detail family are recovered from dense samples
    F = global_detail((2,) * d, l, m, If)
    grids = F.sample_grids()
    err = float(np.abs(F.fit_grid(grids, F.grid_values(grids)) - F.coef).max())
    out["representation_roundtrip"] = _rec(err <= 1e-8, max_error=err, tol=1e-8)
    G = PiecewisePoly.from_dict(json.loads(json.dumps(F.to_dict())))
    Xs = rng.uniform(-2.5, 3.5, (200, d))
    err = float(np.abs(F(Xs) - G(Xs)).max())
    out["serialization_roundtrip"] = _rec(err == 0.0 and np.array_equal(F.coef, G.coef), max_error=err)
    # per-level decay of detail norms along the diagonal
    g = cat.get("sin", d)
    Eg = extend(g, cfg.alpha, cfg.p, cfg.theta, m=cfg.m, K=K)
    diag = [Eg.details[(k,) * d].lq_norm(cfg.p) for k in range(1, K + 1)]
    s = slope(range(1, K + 1), diag)
    out["detail_decay"] = _rec(s <= -1.0, norms=diag, slope=s, bound=-1.0)
    return out


def suite_class_check(cfg: ExperimentConfig) -> dict:
    rng = np.random.default_rng([cfg.seed, 6])
    d = cfg.d
    m = (2,) * d
    failures = 0
    worst = 0.0
    for i in range(cfg.trials):
        f = zero_extend(_rand_trig(d, rng))
        kappa = tuple(int(v) for v in rng.integers(0, 4, d))
        F = global_detail(kappa, (2,) * d, m, f)
        if cfg.inject_pprime_fault and i == 0:
            F = pprime_perturbed(F)
        res = class_check_Pprime(F)
        worst = max(worst, res.max_deviation / max(res.scale, 1.0))
        failures += not res.passed
    out = {"details_in_class": _rec(failures == 0, trials=cfg.trials, failures=failures, max_rel_deviation=worst)}
    R = random_pprime((3,) * d, (1,) * d, m, rng)
    bad = class_check_Pprime(pprime_perturbed(R))
    out["random_class_element"] = _rec(class_check_Pprime(R).passed)
    out["perturbed_element_rejected"] = _rec(not bad.passed and bad.violation is not None, violation=bad.violation)
    return out


def suite_bernstein(cfg: ExperimentConfig) -> dict:
    """Per-axis growth: refine one axis at a time (levels 2..5) with the others held at level 2.

    The maximum ratio over random class elements estimates a supremum, so the
    trial count is doubled relative to ``cfg.trials``.
    """
    out = {}
    d = cfg.d
    m = (2,) * d
    ks = list(range(2, 6))
    for q in (2.0, np.inf):
        for lam in itertools.product(range(3), repeat=d):
            for j in range(d):
                levels = [tuple(k if i == j else 2 for i in range(d)) for k in ks]
                rng = np.random.default_rng([cfg.seed, 7, j, *lam, int(np.isinf(q))])
                res = bernstein_experiment(levels, (1,) * d, m, lam, q, 2 * cfg.trials, rng)
                s = slope(ks, [r["max_ratio"] for r in res["levels"]])
                key = f"q={'inf' if np.isinf(q) else int(q)},lam={','.join(map(str, lam))},axis={j + 1}"
                out[key] = _rec(abs(s - lam[j]) <= 0.5, slope=s, target=float(lam[j]), tol=0.5)
    return out


# ----------------------------------------------------------------------------
# analysis


def suite_analysis(cfg: ExperimentConfig) -> dict:
    rng = np.random.default_rng([cfg.seed, 8])
    out = {}
    ex = [l_of_alpha((1.5, 0.7)), l_of_alpha((1.0,)), l_of_alpha((2.9,))]
    out["l_of_alpha"] = _rec(ex == [(2, 1), (2,), (3,)], examples=[list(e) for e in ex])
    sq = mixed_difference(lambda X: X[..., 0] ** 2, (2,), (0.1,), np.array([[0.3], [0.5]]))
    sep = mixed_difference(lambda X: X[..., 0] + X[..., 1], (1, 1), (0.2, 0.1), np.array([[0.1, 0.3]]))
    ok = np.allclose(sq, 2 * 0.01, atol=1e-14) and abs(float(sep[0])) <= 1e-14
    out["difference_examples"] = _rec(bool(ok))
    worst = 0.0
    for _ in range(20):
        f = _rand_trig(2, rng)
        h = rng.uniform(-0.2, 0.2, 2)
        x = rng.uniform(0.3, 0.6, (10, 2))
        a = mixed_difference(lambda Y: mixed_difference(f, (0, 2), h, Y, domain=False), (1, 0), h, x, domain=False)
        b = mixed_difference(lambda Y: mixed_difference(f, (1, 0), h, Y, domain=False), (0, 2), h, x, domain=False)
        worst = max(worst, float(np.abs(a - b).max()))
    out["difference_commutation"] = _rec(worst <= 1e-12, max_error=worst)
    vals = [(h, OracleEngine(lambda X: 3 * X[..., 0], 1, 2.0).diff_norm((1,), (h,))) for h in (0.1, 0.3, 0.7)]
    e = max(abs(v - 3 * h * (1 - h) ** 0.5) for h, v in vals)
    out["linear_modulus_closed_form"] = _rec(e <= 1e-10, max_error=e)
    funcs = [c for c in cat.catalog(cfg.d) if c.name in cfg.functions]
    params = SmoothnessParams(cfg.alpha, cfg.p, cfg.theta)
    l = params.l
    # Omega' <= Omega on a dyadic t grid
    viol, count = 0, 0
    for c in funcs:
        eng = OracleEngine(c, cfg.d, cfg.p)
        for J in _subsets(cfg.d):
            order = tuple(l[j] if j in J else 0 for j in range(cfg.d))
            for k in range(1, 5):
                t = tuple(2.0 ** (1 - k) if j in J else 0.0 for j in range(cfg.d))
                a = modulus_avg(None, order, t, cfg.p, cfg.d, cfg.n_avg, engine=eng).value
                b = modulus_sup(None, order, t, cfg.p, cfg.d, cfg.n_shifts, cfg.n_avg, engine=eng).value
                viol += a > b
                count += 1
    out["averaged_below_sup_modulus"] = _rec(viol == 0, violations=viol, checked=count)
    out.update(_embeddings(cfg, funcs, params))
    out["difference_derivative_bound"] = _difference_derivative(cfg, funcs, rng)
    # homogeneity and triangle inequality of the averaged-modulus Besov norm
    f1, f2 = _rand_trig(cfg.d, rng), _rand_trig(cfg.d, rng)
    small = SmoothnessParams(cfg.alpha, cfg.p, cfg.theta)
    n1 = besov_norm_prime(f1, small, K_t=5).total
    n2 = besov_norm_prime(f2, small, K_t=5).total
    n12 = besov_norm_prime(lambda X: f1(X) + f2(X), small, K_t=5).total
    nc = besov_norm_prime(lambda X: -2.5 * f1(X), small, K_t=5).total
    hom = abs(nc - 2.5 * n1) <= 1e-8 * n1
    tri = n12 <= (n1 + n2) * (1 + 1e-8)
    out["norm_homogeneity_triangle"] = _rec(hom and tri, norm_1=n1, norm_2=n2, norm_sum=n12)
    zero = besov_norm_prime(cat.get("zero", cfg.d), small, K_t=3).total
    out["norm_of_zero"] = _rec(zero == 0.0)
    # Nikolskii norm of f(x) = x against a dense t grid
    p1 = SmoothnessParams((0.5,), 2.0, np.inf)
    lin = lambda X: X[..., 0]
    rep = nikolskii_norm_prime(lin, p1, K_t=10)
    dense = _dense_nikolskii(lin, p1)
    rel = abs(rep.total - dense) / dense
    out["nikolskii_dense_oracle"] = _rec(rel <= 0.05, value=rep.total, dense=dense, rel_diff=rel)
    return out


def _subsets(d: int):
    for r in range(1, d + 1):
        yield from itertools.combinations(range(d), r)


def _dense_nikolskii(f, params: SmoothnessParams) -> float:
    eng = OracleEngine(f, 1, params.p)
    best = eng.lp_norm()
    for t in np.geomspace(1e-3, 1.0, 200):
        best = max(best, t ** -params.alpha[0] * modulus_avg(None, params.l, (t,), params.p, 1, engine=eng).value)
    return float(best)


def _embeddings(cfg: ExperimentConfig, funcs, params: SmoothnessParams) -> dict:
    c4 = float(np.prod([2.0 ** (2 + a) for a in params.alpha]))
    v8, v10 = [], []
    table = {}
    for c in funcs:
        if min(c.smoothness(cfg.p)) <= max(params.alpha):
            continue
        eng = OracleEngine(c, cfg.d, cfg.p)
        B = besov_norm_prime(c, params, cfg.K_t, cfg.n_avg, engine=eng).total
        H = nikolskii_norm_prime(c, params, cfg.K_t, cfg.n_avg, engine=eng).total
        if H > c4 * B:
            v8.append(c.name)
        row = {"H_prime": H, "B_prime": B}
        ell = tuple(int(np.ceil(a)) - 1 for a in params.alpha)
        if all(c.has_derivative(tuple(e if j in J else 0 for j, e in enumerate(ell)), cfg.p)
               for J in _subsets(cfg.d)):
            Bl = besov_norm_ell(c, c.derivative, params, cfg.K_t, cfg.n_shifts, cfg.n_avg).total
            row["B_ell"] = Bl
            if B > Bl * (1 + 1e-9):
                v10.append(c.name)
        table[c.name] = row
    return {
        "nikolskii_below_besov": _rec(not v8, c4=c4, violations=v8, norms=table),
        "besov_prime_below_besov_ell": _rec(not v10, violations=v10),
    }


def _difference_derivative(cfg: ExperimentConfig, funcs, rng) -> dict:
    d = cfg.d
    l = l_of_alpha(cfg.alpha)
    viol, count = 0, 0
    worst = 0.0
    for c in funcs:
        if not c.has_derivative(l, cfg.p):
            continue
        rhs_norm = OracleEngine(c.derivative(l), d, cfg.p).lp_norm()
        eng = OracleEngine(c, d, cfg.p)
        for _ in range(100):
            h = tuple(float(v) for v in rng.uniform(0.01, 0.45, d))
            lhs = eng.diff_norm(l, h)
            rhs = float(np.prod([hj**lj for hj, lj in zip(h, l)])) * rhs_norm
            count += 1
            worst = max(worst, lhs / rhs if rhs > 0 else 0.0)
            # absolute floor: when D^l f = 0 the difference is pure roundoff
            viol += lhs > rhs * (1 + 1e-9) + 1e-12
    return _rec(viol == 0, violations=viol, pairs=count, max_ratio=worst, rtol=1e-9, atol=1e-12)


# ----------------------------------------------------------------------------
# catalog and main experiment


def suite_catalog(cfg: ExperimentConfig) -> dict:
    rng = np.random.default_rng([cfg.seed, 9])
    worst = max(c.spot_check(rng, max_order=2, p=cfg.p) for c in cat.catalog(cfg.d))
    return {"derivative_oracles": _rec(worst <= 1e-5, max_rel_error=worst, tol=1e-5)}


def main_theorem_table(d: int, alpha, p: float, theta: float, m, Ks, functions, K_t: int = 8, n_avg: int = 6) -> dict:
    """Ratio of the whole-space derivative seminorms of the truncated extension to the cube norm.

    For every catalog function with smoothness above ``alpha`` and every
    ``K`` in ``Ks`` the largest seminorm over ``lam < alpha`` with ``lam <= m``
    is divided by the averaged-modulus Besov norm of ``f``.
    """
    params = SmoothnessParams(tuple(alpha), p, theta)
    l = params.l
    m = l if m is None else tuple(m)
    lams = [lam for lam in itertools.product(*(range(int(np.ceil(a))) for a in params.alpha))
            if all(lj <= mj for lj, mj in zip(lam, m))]
    rows = {}
    for name in functions:
        c = cat.get(name, d)
        if min(c.smoothness(p)) <= max(params.alpha):
            continue
        B = besov_norm_prime(c, params, K_t, n_avg).total
        ratios = []
        per_lam = []
        for K in Ks:
            E = extend(c, params.alpha, p, theta, m=m, K=K)
            vals = {",".join(map(str, lam)): derivative_besov_norm(E, lam, params, K_t).total for lam in lams}
            per_lam.append(vals)
            ratios.append(max(vals.values()) / B)
        by_lam = {key: [v[key] / B for v in per_lam] for key in per_lam[0]} if per_lam else {}
        rows[name] = {"besov_prime": B, "K": list(Ks), "ratio": ratios, "ratio_by_lam": by_lam, "seminorms": per_lam}
    return rows


def stability_report(rows: dict, limit: float = 0.10) -> dict:
    """Relative change between the last two truncation levels, per function and ``lam``.

    ``monotone`` records whether the ratio sequence is nonincreasing; it is
    reported alongside but the pass flag only asks for stabilisation.
    """
    change, monotone = {}, {}
    for name, r in rows.items():
        for key, seq in r["ratio_by_lam"].items():
            tag = f"{name}[{key}]"
            if len(seq) > 1 and seq[-2] > 0:
                change[tag] = abs(seq[-1] - seq[-2]) / seq[-2]
            monotone[tag] = all(b <= a * (1 + 1e-12) for a, b in zip(seq, seq[1:]))
    return {"passed": bool(change) and all(v <= limit for v in change.values()), "change": change,
            "monotone": monotone, "limit": limit}


def suite_main_theorem(cfg: ExperimentConfig) -> dict:
    K = cfg.K_eff
    Ks = sorted({max(K - 2, 0), max(K - 1, 0), K})
    rows = main_theorem_table(cfg.d, cfg.alpha, cfg.p, cfg.theta, cfg.m, Ks, cfg.functions, cfg.K_t, cfg.n_avg)
    finite = bool(rows) and all(np.all(np.isfinite(r["ratio"])) for r in rows.values())
    stab = stability_report(rows)
    bound = max((max(r["ratio"]) for r in rows.values()), default=0.0)
    return {
        "ratios_finite": _rec(finite),
        "ratios_stable_in_K": _rec(stab["passed"], last_step_change=stab["change"], nonincreasing=stab["monotone"],
                                   limit=stab["limit"]),
        "uniform_bound": _rec(finite and np.isfinite(bound), constant=bound, table=rows),
    }


SUITES = {
    "index": suite_index,
    "splines": suite_splines,
    "polyproj": suite_polyproj,
    "quasiinterp": suite_quasiinterp,
    "extension": suite_extension,
    "class_check": suite_class_check,
    "bernstein": suite_bernstein,
    "analysis": suite_analysis,
    "catalog": suite_catalog,
    "main_theorem": suite_main_theorem,
}


def run_suite(name: str, cfg: ExperimentConfig) -> dict:
    checks = SUITES[name](cfg)
    return {"passed": all(c["passed"] for c in checks.values()), "checks": checks}


def run_verify(cfg: ExperimentConfig) -> dict:
    names = list(SUITES) if "all" in cfg.suites else list(cfg.suites)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ConfigError(f"unknown suites {unknown}; choose from {sorted(SUITES)}")
    suites = {n: run_suite(n, cfg) for n in names}
    return {
        "schema": REPORT_SCHEMA,
        "type": "verify_report",
        "config": cfg.serialize(),
        "suites": suites,
        "passed": all(s["passed"] for s in suites.values()),
    }


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if np.isnan(v):
            return "nan"
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def report_json(report: dict) -> str:
    """Deterministic JSON text: sorted keys, non-finite floats as strings."""
    return json.dumps(_clean(report), sort_keys=True, indent=1) + "\n"
