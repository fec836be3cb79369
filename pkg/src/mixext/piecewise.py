"""Families ``sum_nu f_nu g_{kappa,nu}`` of spline-blended polynomials.

Every polynomial ``f_nu`` is stored in the orthonormal basis of its home cell
``Q_{kappa,nu}``, so with ``t = 2^kappa x - nu`` a single term reads
``psi^{1,m}(t) * pi_i(t)`` along each axis. The whole family is separable term
by term, which turns evaluation on tensor grids into a chain of small matrix
products.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import comb
from typing import Sequence

import numpy as np

from . import _kernels
from .index import Box, IntBox, as_index
from .polyproj import TensorPoly, frame_transfer, gauss_legendre, ortho_basis
from .splines import eval_psi, refinement_coeffs

__all__ = ["PiecewisePoly", "apply_block_axis", "support_box_Qm", "SCHEMA_VERSION"]

SCHEMA_VERSION = 1


def support_box_Qm(m) -> Box:
    """The box ``-(m+1) + (2m+3) I^d`` holding every family's support."""
    m = as_index(m)
    return Box(tuple(-(mj + 1.0) for mj in m), tuple(2.0 * mj + 3.0 for mj in m))


def apply_block_axis(coef: np.ndarray, j: int, A: np.ndarray) -> np.ndarray:
    """Apply a block map along axis ``j`` of a ``(n_1..n_d, L_1..L_d)`` array.

    ``A`` has shape ``(n_out, L_out, n_in, L_in)`` and acts on the index pair
    ``(nu_j, i_j)``.
    """
    d = coef.ndim // 2
    t = np.moveaxis(coef, (j, d + j), (0, 1))
    rest = t.shape[2:]
    n_in, L_in = t.shape[:2]
    n_out, L_out = A.shape[:2]
    out = A.reshape(n_out * L_out, n_in * L_in) @ t.reshape(n_in * L_in, -1)
    out = out.reshape((n_out, L_out) + rest)
    return np.moveaxis(out, (0, 1), (j, d + j))


def _leibniz_table(m: int, deg: int, lam: int, t: np.ndarray) -> np.ndarray:
    """``d^lam/dt^lam [psi^{1,m}(t) pi_i(t)]`` stacked over ``i`` on a trailing axis."""
    basis = ortho_basis(deg)
    out = np.zeros(t.shape + (deg + 1,))
    for r in range(lam + 1):
        if r > deg:
            break
        out += comb(lam, r) * eval_psi(m, lam - r, t)[..., None] * basis(t, r)
    return out


@dataclass
class PiecewisePoly:
    """Element ``sum_nu f_nu g_{kappa,nu}`` of a spline-blended polynomial class.

    Attributes
    ----------
    kappa, m : tuple of int
        Dyadic level and spline order per axis.
    coef : ndarray
        Shape ``(n_1, ..., n_d, L_1, ..., L_d)``; entry ``[nu - lo, i]`` is the
        coefficient of ``pi_i`` in the home frame of index ``nu``.
    lo : tuple of int
        Smallest index per axis, ``-m`` for the standard family.
    cube_only : bool
        Restrict evaluation to the closed unit cube (the cube-side operators).
    """

    kappa: tuple[int, ...]
    m: tuple[int, ...]
    coef: np.ndarray
    lo: tuple[int, ...] | None = None
    cube_only: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.kappa = as_index(self.kappa)
        d = len(self.kappa)
        self.m = as_index(self.m, d)
        self.coef = np.asarray(self.coef, dtype=float)
        if self.coef.ndim != 2 * d:
            raise ValueError(f"coefficient array must have rank {2 * d}")
        self.lo = tuple(-mj for mj in self.m) if self.lo is None else as_index(self.lo, d)

    # -- shape -------------------------------------------------------------
    @property
    def d(self) -> int:
        return len(self.kappa)

    @property
    def degree(self) -> tuple[int, ...]:
        return tuple(s - 1 for s in self.coef.shape[self.d :])

    @property
    def n(self) -> tuple[int, ...]:
        return self.coef.shape[: self.d]

    @property
    def hi(self) -> tuple[int, ...]:
        return tuple(l + n - 1 for l, n in zip(self.lo, self.n))

    @property
    def indices(self) -> IntBox:
        return IntBox(self.lo, self.hi)

    def is_standard(self) -> bool:
        return self.lo == tuple(-mj for mj in self.m) and self.hi == tuple(2**k - 1 for k in self.kappa)

    def poly(self, nu) -> TensorPoly:
        """``f_nu`` as a :class:`TensorPoly` on its home cell."""
        nu = as_index(nu, self.d)
        h = [2.0**-k for k in self.kappa]
        box = Box(tuple(v * e for v, e in zip(nu, h)), tuple(h))
        return TensorPoly(box, self.coef[self.indices.offset(nu)])

    def support(self) -> Box:
        h = [2.0**-k for k in self.kappa]
        return Box(
            tuple(l * e for l, e in zip(self.lo, h)),
            tuple((hi - l + mj + 1) * e for l, hi, mj, e in zip(self.lo, self.hi, self.m, h)),
        )

    def copy_with(self, coef: np.ndarray, **kw) -> "PiecewisePoly":
        args = dict(kappa=self.kappa, m=self.m, coef=coef, lo=self.lo, cube_only=self.cube_only, meta=dict(self.meta))
        args.update(kw)
        return PiecewisePoly(**args)

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other: "PiecewisePoly") -> "PiecewisePoly":
        if other.kappa != self.kappa or other.m != self.m or other.degree != self.degree:
            raise ValueError("families live in different classes; refine first")
        lo = tuple(min(a, b) for a, b in zip(self.lo, other.lo))
        hi = tuple(max(a, b) for a, b in zip(self.hi, other.hi))
        out = np.zeros(tuple(h - l + 1 for l, h in zip(lo, hi)) + self.coef.shape[self.d :])
        for f in (self, other):
            sl = tuple(slice(a - l, a - l + n) for a, l, n in zip(f.lo, lo, f.n))
            out[sl] += f.coef
        return self.copy_with(out, lo=lo, cube_only=self.cube_only and other.cube_only)

    def __rmul__(self, s: float) -> "PiecewisePoly":
        return self.copy_with(s * self.coef)

    def __sub__(self, other: "PiecewisePoly") -> "PiecewisePoly":
        return self + (-1.0) * other

    # -- per-axis tables ---------------------------------------------------
    def axis_table(self, j: int, xs, lam: int = 0, diff: int = 0, h: float = 0.0, blend: bool = True) -> np.ndarray:
        """Dense factor table of shape ``(len(xs), n_j, L_j)`` along axis ``j``.

        Entry ``[p, nu, i]`` is ``Delta_h^diff d^lam/dx^lam [psi(t) pi_i(t)]`` at
        ``x = xs[p]`` with ``t = 2^kappa_j x - nu``. With ``blend=False`` the
        spline factor is dropped (plain home-frame polynomials).
        """
        xs = np.asarray(xs, dtype=float)
        if lam > self.m[j] and blend:
            raise ValueError(f"derivative order {lam} exceeds spline order {self.m[j]} on axis {j + 1}")
        s = 2.0 ** self.kappa[j]
        nus = np.arange(self.lo[j], self.hi[j] + 1, dtype=float)
        deg = self.degree[j]
        out = np.zeros((xs.size, nus.size, deg + 1))
        rows = np.arange(xs.size)
        for k in range(diff + 1):
            w = (-1) ** (diff - k) * comb(diff, k)
            if not blend:
                out += w * ortho_basis(deg)(s * (xs[:, None] + k * h) - nus[None, :], lam)
                continue
            # only the m+1 indices whose spline covers the point contribute
            y = s * (xs + k * h)
            base = np.floor(y)
            for o in range(self.m[j] + 1):
                nu = base - o
                pos = (nu - self.lo[j]).astype(np.int64)
                ok = (pos >= 0) & (pos < nus.size)
                if ok.any():
                    out[rows[ok], pos[ok]] += w * _leibniz_table(self.m[j], deg, lam, y[ok] - nu[ok])
        return out * s**lam

    # -- evaluation --------------------------------------------------------
    def grid_values(self, grids: Sequence[np.ndarray], lam=None, diff=None, h=None) -> np.ndarray:
        """Values of ``Delta_h^diff D^lam F`` on the tensor grid ``grids[0] x ... x grids[d-1]``."""
        d = self.d
        lam = (0,) * d if lam is None else as_index(lam, d)
        diff = (0,) * d if diff is None else as_index(diff, d)
        h = (0.0,) * d if h is None else tuple(float(v) for v in h)
        tables = [self.axis_table(j, grids[j], lam[j], diff[j], h[j]) for j in range(d)]
        return self._contract(tables, grids)

    def _contract(self, tables, grids) -> np.ndarray:
        d = self.d
        A = np.moveaxis(self.coef, [d + j for j in range(d)], [2 * j + 1 for j in range(d)])
        A = A.reshape([self.n[j] * (self.degree[j] + 1) for j in range(d)])
        for j in range(d):
            T = tables[j].reshape(tables[j].shape[0], -1)
            A = np.tensordot(A, T, axes=([0], [1]))
        if self.cube_only:
            for j in range(d):
                g = np.asarray(grids[j], dtype=float)
                inside = (g >= 0.0) & (g <= 1.0)
                shape = [1] * d
                shape[j] = g.size
                A = A * inside.reshape(shape)
        return A

    def sample_grids(self, per_cell: int | None = None) -> list[np.ndarray]:
        """Per-axis Gauss nodes on every dyadic cell of the support, enough to fix the coefficients."""
        out = []
        for j in range(self.d):
            x, _ = gauss_legendre(per_cell or (self.m[j] + self.degree[j] + 2))
            h = 2.0 ** -self.kappa[j]
            cells = np.arange(self.lo[j], self.hi[j] + self.m[j] + 1) * h
            out.append((cells[:, None] + h * x[None, :]).reshape(-1))
        return out

    def fit_grid(self, grids: Sequence[np.ndarray], values: np.ndarray) -> np.ndarray:
        """Coefficients of this class that best match ``values`` on a tensor grid.

        Solves the separable least-squares problem axis by axis. With samples
        from :meth:`sample_grids` and values of a member of the class, the
        result recovers its coefficients up to roundoff.
        """
        d = self.d
        A = np.asarray(values, dtype=float)
        for j in range(d):
            T = self.axis_table(j, grids[j]).reshape(len(grids[j]), -1)
            A = np.tensordot(A, np.linalg.pinv(T), axes=([0], [1]))
        A = A.reshape([s for j in range(d) for s in (self.n[j], self.degree[j] + 1)])
        return np.moveaxis(A, [2 * j + 1 for j in range(d)], [d + j for j in range(d)])

    def __call__(self, x, lam=None) -> np.ndarray:
        """Evaluate ``D^lam F`` at scattered points ``x`` of shape ``(..., d)``."""
        x = np.asarray(x, dtype=float)
        d = self.d
        lam = (0,) * d if lam is None else as_index(lam, d)
        pts = x.reshape(-1, d)
        P = pts.shape[0]
        noff = [mj + 1 for mj in self.m]
        nlen = [g + 1 for g in self.degree]
        V = np.zeros((d, P, max(noff), max(nlen)))
        IDX = -np.ones((d, P, max(noff)), dtype=np.int64)
        for j in range(d):
            if lam[j] > self.m[j]:
                raise ValueError(f"derivative order {lam[j]} exceeds spline order {self.m[j]}")
            s = 2.0 ** self.kappa[j]
            y = s * pts[:, j]
            k = np.floor(y)
            for o in range(noff[j]):
                nu = k - o
                pos = (nu - self.lo[j]).astype(np.int64)
                ok = (pos >= 0) & (pos < self.n[j])
                IDX[j, :, o] = np.where(ok, pos, -1)
                V[j, :, o, : nlen[j]] = _leibniz_table(self.m[j], self.degree[j], lam[j], y - nu) * s ** lam[j]
        out = _kernels.family_points(self.coef, V, IDX, noff, nlen)
        if self.cube_only:
            out = np.where(np.all((pts >= 0.0) & (pts <= 1.0), axis=1), out, 0.0)
        return out.reshape(x.shape[:-1])

    def evaluate_direct(self, x, lam=None) -> np.ndarray:
        """Reference evaluation looping over every index (slow; for testing)."""
        from .splines import eval_g

        x = np.asarray(x, dtype=float)
        d = self.d
        lam = (0,) * d if lam is None else as_index(lam, d)
        out = np.zeros(x.shape[:-1])
        if any(lam):
            raise NotImplementedError("direct evaluation only covers lam = 0")
        for nu in self.indices:
            out = out + eval_g(self.kappa, nu, self.m, x) * self.poly(nu)(x)
        if self.cube_only:
            out = np.where(np.all((x >= 0.0) & (x <= 1.0), axis=-1), out, 0.0)
        return out

    # -- norms -------------------------------------------------------------
    def quad_grids(self, domain: str = "R", order: int | None = None, refine: int = 1, box: Box | None = None):
        """Per-axis composite Gauss nodes/weights on the breakpoint grid."""
        order = order or (max(self.m) + max(self.degree) + 2)
        x, w = gauss_legendre(order)
        if box is None:
            box = Box((0.0,) * self.d, (1.0,) * self.d) if domain == "cube" else self.support()
        nodes, weights = [], []
        for j in range(self.d):
            hcell = 2.0 ** -(self.kappa[j] + refine - 1)
            a, b = box.corner[j], box.upper[j]
            # align the composite grid with the dyadic breakpoints
            k0 = np.floor(a / hcell)
            k1 = np.ceil(b / hcell)
            edges = np.arange(k0, k1 + 1) * hcell
            edges = np.clip(edges, a, b)
            edges = np.unique(edges)
            lo, hi = edges[:-1], edges[1:]
            nodes.append((lo[:, None] + (hi - lo)[:, None] * x[None, :]).reshape(-1))
            weights.append(((hi - lo)[:, None] * w[None, :]).reshape(-1))
        return nodes, weights

    def lq_norm(self, q: float, lam=None, domain: str = "R", order: int | None = None, refine: int = 1) -> float:
        """``||D^lam F||_{L_q}`` over the unit cube (``domain='cube'``) or all of ``R^d``."""
        nodes, weights = self.quad_grids(domain, order, refine)
        v = np.abs(self.grid_values(nodes, lam))
        if np.isinf(q):
            return float(v.max()) if v.size else 0.0
        W = weights[0]
        for wj in weights[1:]:
            W = np.multiply.outer(W, wj)
        return float(np.sum(W * v**q) ** (1.0 / q))

    # -- level change ------------------------------------------------------
    def refine_axis(self, j: int) -> "PiecewisePoly":
        """Exact re-expression at level ``kappa + e_j`` via the two-scale relation."""
        mask = refinement_coeffs(self.m[j])
        deg = self.degree[j]
        k = self.kappa[j]
        lo_new, hi_new = 2 * self.lo[j], 2 * self.hi[j] + self.m[j] + 1
        n_in, n_out = self.n[j], hi_new - lo_new + 1
        A = np.zeros((n_out, deg + 1, n_in, deg + 1))
        h0, h1 = 2.0**-k, 2.0 ** -(k + 1)
        for a in range(n_in):
            nu = self.lo[j] + a
            for mu in range(self.m[j] + 2):
                nn = 2 * nu + mu
                T = frame_transfer(deg, nu * h0, h0, nn * h1, h1)
                A[nn - lo_new, :, a, :] += mask[mu] * T.T
        coef = apply_block_axis(self.coef, j, A)
        kappa = tuple(v + (1 if i == j else 0) for i, v in enumerate(self.kappa))
        lo = tuple(lo_new if i == j else v for i, v in enumerate(self.lo))
        return self.copy_with(coef, kappa=kappa, lo=lo)

    def refine_to(self, kappa) -> "PiecewisePoly":
        kappa = as_index(kappa, self.d)
        if any(a < b for a, b in zip(kappa, self.kappa)):
            raise ValueError("can only refine to a finer level")
        out = self
        for j in range(self.d):
            for _ in range(kappa[j] - self.kappa[j]):
                out = out.refine_axis(j)
        return out

    def trimmed(self, tol: float = 0.0) -> "PiecewisePoly":
        """Drop boundary index slabs whose coefficients are all ``<= tol`` in magnitude."""
        d = self.d
        nz = np.abs(self.coef) > tol
        if not nz.any():
            return self
        lo, sl = [], []
        for j in range(d):
            other = tuple(i for i in range(2 * d) if i != j)
            rows = np.nonzero(nz.any(axis=other))[0]
            lo.append(self.lo[j] + int(rows[0]))
            sl.append(slice(int(rows[0]), int(rows[-1]) + 1))
        return self.copy_with(self.coef[tuple(sl)], lo=tuple(lo))

    # -- serialization -----------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "type": "GlobalPiecewisePoly",
            "kappa": list(self.kappa),
            "m": list(self.m),
            "degree": list(self.degree),
            "index_lo": list(self.lo),
            "index_hi": list(self.hi),
            "cube_only": self.cube_only,
            "coef_shape": list(self.coef.shape),
            "coefficients": [float(v) for v in self.coef.reshape(-1)],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PiecewisePoly":
        if data.get("schema") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema {data.get('schema')}")
        coef = np.array(data["coefficients"], dtype=float).reshape(data["coef_shape"])
        return cls(tuple(data["kappa"]), tuple(data["m"]), coef, tuple(data["index_lo"]), bool(data["cube_only"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "PiecewisePoly":
        return cls.from_dict(json.loads(text))
