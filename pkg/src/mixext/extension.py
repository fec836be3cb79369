"""Whole-space detail operators, the truncated extension series and class checks."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .index import Box, as_index, dyadic_cell
from .piecewise import SCHEMA_VERSION, PiecewisePoly, apply_block_axis, support_box_Qm
from .polyproj import ProjectorOp, MaskOp, masked_project, tensor_apply
from .quasiinterp import _clamp_map, detail_family, quasi_interp_E

__all__ = [
    "zero_extend",
    "global_local_projector",
    "global_local_projector_factored",
    "global_detail",
    "ClassCheck",
    "class_check_Pprime",
    "random_pprime",
    "ExtensionResult",
    "extend",
    "bernstein_experiment",
    "pprime_perturbed",
]


def zero_extend(f: Callable, d: int | None = None) -> Callable:
    """Oracle equal to ``f`` on the closed unit cube and 0 elsewhere."""

    def g(x):
        x = np.asarray(x, dtype=float)
        inside = np.all((x >= 0.0) & (x <= 1.0), axis=-1)
        out = np.zeros(x.shape[:-1])
        if inside.any():
            out[inside] = np.asarray(f(x[inside]), dtype=float)
        return out

    g.inner = f
    return g


def global_local_projector(kappa, nu, l, m, f: Callable, order: int | None = None) -> Callable:
    """Projection over ``Q_{kappa,nu}`` onto degree ``<= l``, windowed to the box ``Q^{d,m}``."""
    kappa = as_index(kappa)
    d = len(kappa)
    nu = as_index(nu, d)
    if any(not 0 <= v < 2**k for v, k in zip(nu, kappa)):
        raise ValueError(f"cell index {nu} outside the cube grid at level {kappa}")
    return masked_project(f, dyadic_cell(kappa, nu), support_box_Qm(as_index(m, d)), as_index(l, d), order)


def global_local_projector_factored(kappa, nu, l, m, f: Callable, order: int | None = None) -> Callable:
    """Same operator built as a product of per-axis masked 1-D projectors."""
    kappa = as_index(kappa)
    d = len(kappa)
    nu = as_index(nu, d)
    l = as_index(l, d)
    Q = dyadic_cell(kappa, nu)
    W = support_box_Qm(as_index(m, d))
    ops = [
        MaskOp(W.corner[j], W.upper[j]) @ ProjectorOp(Q.corner[j], Q.edge[j], l[j], order or max(l) + 3)
        for j in range(d)
    ]
    return tensor_apply(ops, f)


def global_detail(kappa, l, m, f: Callable, order: int | None = None) -> PiecewisePoly:
    """Whole-space level-``kappa`` detail of ``f`` (difference order ``l``, degree ``l - 1``).

    The polynomial attached to ``nu`` is the unwindowed alternating sum of cell
    projections; the window ``Q^{d,m}`` never cuts a spline support, so the
    family is the whole-space operator exactly.
    """
    kappa = as_index(kappa)
    d = len(kappa)
    C = detail_family(kappa, l, m, f, order)
    return PiecewisePoly(kappa, as_index(m, d), C, meta={"operator": "global_detail", "l": list(as_index(l, d))})


# ----------------------------------------------------------------------------
# boundary classes


@dataclass
class ClassCheck:
    passed: bool
    max_deviation: float
    scale: float
    violation: dict | None = None

    def __bool__(self) -> bool:
        return self.passed


def _slice_values(F: PiecewisePoly, j: int, grids) -> np.ndarray:
    """Axis-``j`` slices ``f^j_{nu_j}`` on a tensor grid, with ``nu_j`` as the leading axis."""
    d = F.d
    N, L, P = "abcdef"[:d], "ghijkl"[:d], "mnopqr"[:d]
    operands, subs = [F.coef], [N + L]
    for i in range(d):
        operands.append(F.axis_table(i, grids[i], blend=(i != j)))
        subs.append(P[i] + N[i] + L[i])
    expr = ",".join(subs) + "->" + N[j] + P
    return np.einsum(expr, *operands, optimize=True)


def _edge_blocks(F: PiecewisePoly, j: int):
    k, mj = F.kappa[j], F.m[j]
    return [("low", -mj, 0, 0), ("high", 2**k - mj - 1, 2**k - 1, 2**k - mj - 1)]


def class_check_Pprime(F: PiecewisePoly, rtol: float = 1e-9, points_per_cell: int = 3) -> ClassCheck:
    """Check the edge-block slice conditions of the boundary class.

    For each axis ``j`` the slices ``f^j_{nu_j}(x) = sum_{nu'} g_{nu'}(x') f_nu(x)``
    (sum over the other axes) must coincide for all ``nu_j`` in the low block
    ``[-m_j, 0]`` and, separately, in the high block
    ``[2^kappa_j - m_j - 1, 2^kappa_j - 1]``. Slices are compared on a grid
    covering ``Q^{d,m}`` with a tolerance relative to the largest slice value.
    The reported violation names the axis 1-based.
    """
    if not F.is_standard():
        raise ValueError("class check needs the standard index range [-m, 2^kappa - 1]")
    d = F.d
    W = support_box_Qm(F.m)
    rng = np.random.default_rng(12345)
    grids = []
    for i in range(d):
        ncell = int(round(W.edge[i] * 2 ** F.kappa[i]))
        u = rng.random(points_per_cell)
        g = (np.arange(ncell)[:, None] + u[None, :]).reshape(-1) * 2.0 ** -F.kappa[i] + W.corner[i]
        grids.append(np.sort(g))
    slices = [_slice_values(F, j, grids) for j in range(d)]
    scale = max(float(np.abs(S).max()) for S in slices)
    tol = rtol * max(scale, 1.0)
    worst = 0.0
    violation = None
    for j, S in enumerate(slices):
        mj = F.m[j]
        for side, a, b, ref in _edge_blocks(F, j):
            for v in range(a, b + 1):
                dev = float(np.abs(S[v + mj] - S[ref + mj]).max())
                worst = max(worst, dev)
                if dev > tol and violation is None:
                    violation = {"axis": j + 1, "index": v, "side": side, "deviation": dev}
    return ClassCheck(violation is None, worst, scale, violation)


def random_pprime(kappa, degree, m, rng: np.random.Generator) -> PiecewisePoly:
    """Random element of the boundary class with i.i.d. normal free coefficients.

    Free polynomials sit on the clamp representatives ``0..(2^kappa - m - 1)_+``
    (coefficients drawn in their own cell frames); every other index receives a
    copy of its representative's polynomial.
    """
    kappa = as_index(kappa)
    d = len(kappa)
    degree = as_index(degree, d)
    m = as_index(m, d)
    nrep = [max(2**k - mj - 1, 0) + 1 for k, mj in zip(kappa, m)]
    C = np.zeros(tuple(2**k for k in kappa) + tuple(g + 1 for g in degree))
    C[tuple(slice(0, n) for n in nrep)] = rng.standard_normal(tuple(nrep) + tuple(g + 1 for g in degree))
    for j in range(d):
        C = apply_block_axis(C, j, _clamp_map(kappa[j], m[j], degree[j]))
    return PiecewisePoly(kappa, m, C)


# ----------------------------------------------------------------------------
# extension


@dataclass
class ExtensionResult:
    """Truncated extension series ``sum_{kappa <= K e} detail_kappa``.

    ``details`` maps each level to its whole-space detail family.
    """

    alpha: tuple[float, ...]
    p: float
    theta: float
    l: tuple[int, ...]
    m: tuple[int, ...]
    K: int
    details: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    _total: PiecewisePoly | None = field(default=None, repr=False)

    @property
    def d(self) -> int:
        return len(self.l)

    def total(self) -> PiecewisePoly:
        """The partial sum as one family at level ``K e`` (exact refinement of every detail)."""
        if self._total is None:
            top = (self.K,) * self.d
            acc = None
            for F in self.details.values():
                G = F.refine_to(top)
                acc = G if acc is None else acc + G
            self._total = acc
        return self._total

    def __call__(self, x, lam=None) -> np.ndarray:
        return self.total()(x, lam)

    def shell_values(self, x, lam=None) -> list[np.ndarray]:
        """Contributions grouped by shell ``max_j kappa_j = k``, ``k = 0..K``."""
        x = np.asarray(x, dtype=float)
        out = [np.zeros(x.shape[:-1]) for _ in range(self.K + 1)]
        for kappa, F in self.details.items():
            out[max(kappa)] = out[max(kappa)] + F(x, lam)
        return out

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "type": "ExtensionResult",
            "alpha": list(self.alpha),
            "p": self.p,
            "theta": _num(self.theta),
            "l": list(self.l),
            "m": list(self.m),
            "K": self.K,
            "details": [F.to_dict() for _, F in sorted(self.details.items())],
            "diagnostics": self.diagnostics,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExtensionResult":
        if data.get("schema") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema {data.get('schema')}")
        details = {}
        for item in data["details"]:
            F = PiecewisePoly.from_dict(item)
            details[F.kappa] = F
        theta = data["theta"]
        theta = float("inf") if theta == "inf" else float(theta)
        return cls(
            tuple(data["alpha"]), float(data["p"]), theta, tuple(data["l"]), tuple(data["m"]), int(data["K"]),
            details, data.get("diagnostics", {}),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExtensionResult":
        return cls.from_dict(json.loads(text))


def _num(v: float):
    return "inf" if np.isinf(v) else v


def extend(f: Callable, alpha, p: float, theta: float, m=None, K: int | None = None, order: int | None = None) -> ExtensionResult:
    """Truncated extension of ``f`` from the unit cube to ``R^d``.

    Parameters
    ----------
    f : callable
        Vectorised oracle on the unit cube.
    alpha : sequence of float
        Smoothness per axis, all positive; fixes ``l = l(alpha)``.
    p, theta : float
        Integrability and fine index, ``1 <= p < inf``, ``1 <= theta <= inf``.
    m : sequence of int, optional
        Spline order, ``m >= l``; defaults to ``l``.
    K : int, optional
        Keep every level ``kappa <= K e``; defaults to 5 for ``d = 1`` and 4 otherwise.
    """
    from .analysis import l_of_alpha

    alpha = tuple(float(a) for a in np.atleast_1d(alpha))
    d = len(alpha)
    if any(a <= 0 for a in alpha):
        raise ValueError("smoothness must be positive")
    if not 1 <= p < np.inf:
        raise ValueError("need 1 <= p < inf")
    if not theta >= 1:
        raise ValueError("need theta >= 1")
    l = l_of_alpha(alpha)
    m = l if m is None else as_index(m, d)
    if any(mj < lj for mj, lj in zip(m, l)):
        raise ValueError("spline order must satisfy m >= l(alpha)")
    K = (5 if d == 1 else 4) if K is None else int(K)
    if K < 0:
        raise ValueError("truncation level must be nonnegative")
    If = zero_extend(f)
    res = ExtensionResult(alpha, float(p), float(theta), l, m, K)
    norms = {}
    for kappa in np.ndindex(*(K + 1,) * d):
        kappa = tuple(int(k) for k in kappa)
        F = global_detail(kappa, l, m, If, order)
        res.details[kappa] = F
        norms[",".join(map(str, kappa))] = F.lq_norm(p)
    res.diagnostics["detail_lp_norms"] = norms
    return res


def bernstein_experiment(levels: Sequence, degree, m, lam, q: float, trials: int, rng: np.random.Generator) -> dict:
    """Growth of ``||D^lam F||_{L_q(R^d)} / ||F||_{L_q(I^d)}`` over random boundary-class elements.

    Returns the maximum ratio per level and the log2-slopes between
    consecutive levels (divided by the number of refined steps).
    """
    out = []
    for kappa in levels:
        kappa = as_index(kappa)
        best = 0.0
        for _ in range(trials):
            F = random_pprime(kappa, degree, m, rng)
            num = F.lq_norm(q, lam, domain="R")
            den = F.lq_norm(q, None, domain="cube")
            best = max(best, num / den)
        out.append({"kappa": list(kappa), "max_ratio": best})
    slopes = []
    for a, b in zip(out[:-1], out[1:]):
        steps = sum(y - x for x, y in zip(a["kappa"], b["kappa"]))
        slopes.append(float(np.log2(b["max_ratio"] / a["max_ratio"]) / max(steps, 1)))
    return {"levels": out, "slopes": slopes, "lam": list(as_index(lam)), "q": q}


def pprime_perturbed(F: PiecewisePoly, scale: float = 1.0) -> PiecewisePoly:
    """Copy of ``F`` with the corner polynomial at ``nu = -m`` perturbed."""
    C = F.coef.copy()
    corner = (0,) * F.d
    C[corner + (0,) * F.d] += scale
    return F.copy_with(C)
