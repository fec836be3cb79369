"""Orthonormal polynomial bases, local L2 projectors and tensor lifting.

The 1-D basis ``pi_0, pi_1, ...`` is orthonormal in ``L2(0, 1)``. A
:class:`TensorPoly` stores coefficients over ``prod_j pi_{i_j}((x_j - a_j) / delta_j)``
on a reference box ``a + delta * I^d``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import sqrt
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import legendre

from .index import Box, as_index

__all__ = [
    "OrthoBasis1D",
    "ortho_basis",
    "gauss_legendre",
    "TensorPoly",
    "project",
    "project_cells",
    "eval_poly",
    "differentiate_poly",
    "transfer_matrix",
    "derivative_matrix",
    "apply_axis",
    "AxisOperator",
    "IdentityOp",
    "ProjectorOp",
    "MaskOp",
    "tensor_apply",
    "masked_project",
    "default_order",
]

MAX_EXACT_DEGREE = 10


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """``n``-point Gauss-Legendre nodes and weights on ``[0, 1]``."""
    if n < 1:
        raise ValueError("need at least one node")
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def default_order(l) -> int:
    """Default Gauss order per axis per cell: ``max(l) + 3``."""
    return int(max(as_index(l))) + 3


# ----------------------------------------------------------------------------
# 1-D basis


def _inner(p: list[Fraction], q: list[Fraction]) -> Fraction:
    # int_0^1 p q with ascending coefficients
    s = Fraction(0)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            s += a * b / (i + j + 1)
    return s


@lru_cache(maxsize=None)
def _exact_orthogonal(l: int) -> tuple[tuple[tuple[Fraction, ...], ...], tuple[Fraction, ...]]:
    """Monic orthogonal polynomials on I and their squared norms, exactly."""
    polys: list[list[Fraction]] = []
    norms: list[Fraction] = []
    for k in range(l + 1):
        q = [Fraction(0)] * k + [Fraction(1)]
        for p, n2 in zip(polys, norms):
            c = _inner(q, p) / n2
            for i, a in enumerate(p):
                q[i] -= c * a
        polys.append(q)
        norms.append(_inner(q, q))
    return tuple(tuple(p) for p in polys), tuple(norms)


@dataclass(frozen=True)
class OrthoBasis1D:
    """Orthonormal system ``pi_0..pi_l`` on ``I = (0, 1)``.

    Attributes
    ----------
    l : int
        Highest degree.
    monomial : ndarray, shape (l+1, l+1)
        ``monomial[i, k]`` is the coefficient of ``u**k`` in ``pi_i``.
    """

    l: int
    monomial: np.ndarray

    def __call__(self, u, deriv: int = 0) -> np.ndarray:
        """Values ``pi_i^{(deriv)}(u)`` stacked on a trailing axis of length ``l+1``."""
        # Legendre-series evaluation is far better conditioned than the monomial form
        u = np.asarray(u, dtype=float)
        c = _legendre_coeffs(self.l, deriv)
        if c.shape[0] == 0:
            return np.zeros(u.shape + (self.l + 1,))
        out = legendre.legval(2.0 * u - 1.0, c, tensor=True)
        return np.moveaxis(out, 0, -1)

    def gram(self, n: int | None = None) -> np.ndarray:
        x, w = gauss_legendre(n or self.l + 2)
        v = self(x)
        return (v * w[:, None]).T @ v


@lru_cache(maxsize=None)
def _legendre_coeffs(l: int, deriv: int) -> np.ndarray:
    """Column ``i`` holds the Legendre coefficients (in ``2u - 1``) of ``pi_i^{(deriv)}``."""
    c = np.diag(np.sqrt(2.0 * np.arange(l + 1) + 1.0))
    if deriv:
        c = legendre.legder(c, deriv, scl=2.0, axis=0) if deriv <= l else np.zeros((0, l + 1))
    c.setflags(write=False)
    return c


@lru_cache(maxsize=None)
def ortho_basis(l: int) -> OrthoBasis1D:
    """Orthonormal basis of degree ``<= l`` on ``I``.

    Orthogonalisation runs in rational arithmetic; only the final
    normalisation by ``sqrt`` of the rational squared norm is done in floating
    point.
    """
    if l < 0:
        raise ValueError("degree must be nonnegative")
    if l > MAX_EXACT_DEGREE:
        warnings.warn(f"basis degree {l} beyond the cached exact range", stacklevel=2)
    polys, norms = _exact_orthogonal(l)
    mono = np.zeros((l + 1, l + 1))
    for i, (p, n2) in enumerate(zip(polys, norms)):
        s = 1.0 / sqrt(float(n2)) if i else 1.0
        for k, a in enumerate(p):
            mono[i, k] = float(a) * s
    mono.setflags(write=False)
    return OrthoBasis1D(l, mono)


@lru_cache(maxsize=None)
def derivative_matrix(l: int) -> np.ndarray:
    """``D[i, j]`` with ``pi_i' = sum_j D[i, j] pi_j`` (strictly lower triangular)."""
    b = ortho_basis(l)
    x, w = gauss_legendre(l + 1)
    D = (b(x, 1) * w[:, None]).T @ b(x)
    D[np.triu_indices(l + 1)] = 0.0
    D.setflags(write=False)
    return D


@lru_cache(maxsize=4096)
def transfer_matrix(l: int, scale: float, shift: float) -> np.ndarray:
    """Re-expansion between frames.

    If ``u = shift + scale * v``, then ``sum_i c_i pi_i(u) = sum_k (c @ T)_k pi_k(v)``.
    """
    b = ortho_basis(l)
    x, w = gauss_legendre(l + 1)
    T = (b(shift + scale * x) * w[:, None]).T @ b(x)
    T.setflags(write=False)
    return T


def frame_transfer(l: int, src_corner: float, src_edge: float, dst_corner: float, dst_edge: float) -> np.ndarray:
    return transfer_matrix(l, dst_edge / src_edge, (dst_corner - src_corner) / src_edge)


def apply_axis(arr: np.ndarray, mat: np.ndarray, axis: int) -> np.ndarray:
    """Contract ``arr`` along ``axis`` with the first index of ``mat``, in place of that axis."""
    out = np.tensordot(arr, mat, axes=([axis], [0]))
    return np.moveaxis(out, -1, axis)


# ----------------------------------------------------------------------------
# tensor polynomials


@dataclass(frozen=True)
class TensorPoly:
    """Polynomial on ``R^d`` expanded in the orthonormal basis of ``box``.

    ``coef`` has shape ``(l_1+1, ..., l_d+1)``.
    """

    box: Box
    coef: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coef, dtype=float)
        if c.ndim != self.box.d:
            raise ValueError("coefficient tensor rank must equal the box dimension")
        object.__setattr__(self, "coef", c)

    @property
    def d(self) -> int:
        return self.box.d

    @property
    def l(self) -> tuple[int, ...]:
        return tuple(s - 1 for s in self.coef.shape)

    def __call__(self, x) -> np.ndarray:
        return eval_poly(self, x)

    def derivative(self, lam) -> "TensorPoly":
        return differentiate_poly(self, lam)

    def l2_norm(self) -> float:
        """``L2(box)`` norm, exact from the coefficients."""
        return float(np.sqrt(self.box.volume) * np.linalg.norm(self.coef))

    def to_box(self, box: Box) -> "TensorPoly":
        c = self.coef
        for j in range(self.d):
            T = frame_transfer(self.l[j], self.box.corner[j], self.box.edge[j], box.corner[j], box.edge[j])
            c = apply_axis(c, T, j)
        return TensorPoly(box, c)

    def monomial_form(self) -> np.ndarray:
        """Coefficients in the local monomials ``prod_j u_j**k_j``, ``u = (x - a) / delta``."""
        c = self.coef
        for j in range(self.d):
            c = apply_axis(c, ortho_basis(self.l[j]).monomial, j)
        return c

    def __add__(self, other: "TensorPoly") -> "TensorPoly":
        if other.box != self.box or other.coef.shape != self.coef.shape:
            other = other.to_box(self.box)
        return TensorPoly(self.box, self.coef + other.coef)

    def __sub__(self, other: "TensorPoly") -> "TensorPoly":
        return self + (-1.0) * other

    def __rmul__(self, s: float) -> "TensorPoly":
        return TensorPoly(self.box, s * self.coef)

    def lp_norm(self, p: float, box: Box | None = None, order: int | None = None) -> float:
        """``L_p`` norm over ``box`` (default: the reference box) by Gauss quadrature.

        For ``p = inf`` the maximum is taken over the Gauss nodes plus the box corners.
        """
        box = box or self.box
        n = order or (max(self.l) + 2 if p == 2 else max(self.l) + 4)
        x, w = gauss_legendre(n)
        if np.isinf(p):
            x = np.concatenate([[0.0], x, [1.0]])
        grids = [box.corner[j] + box.edge[j] * x for j in range(self.d)]
        X = np.stack(np.meshgrid(*grids, indexing="ij"), axis=-1)
        v = np.abs(self(X))
        if np.isinf(p):
            return float(v.max())
        W = np.ones(())
        for j in range(self.d):
            W = np.multiply.outer(W, w * box.edge[j])
        return float(np.sum(W * v**p) ** (1.0 / p))


def eval_poly(p: TensorPoly, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    u = p.box.to_local(x)
    out = np.broadcast_to(p.coef, x.shape[:-1] + p.coef.shape)
    for j in range(p.d - 1, -1, -1):
        out = _contract_last(out, ortho_basis(p.l[j])(u[..., j]))
    return out


def _contract_last(t: np.ndarray, v: np.ndarray) -> np.ndarray:
    # t: (..., L_1..L_j), v: (..., L_j)
    extra = t.ndim - v.ndim
    v = v.reshape(v.shape[:-1] + (1,) * extra + v.shape[-1:])
    return np.sum(t * v, axis=-1)


def differentiate_poly(p: TensorPoly, lam) -> TensorPoly:
    """Exact mixed derivative ``D^lam p`` in the same basis and degree bound."""
    lam = as_index(lam, p.d)
    if any(v < 0 for v in lam):
        raise ValueError("derivative order must be nonnegative")
    c = p.coef
    for j, r in enumerate(lam):
        if r == 0:
            continue
        D = derivative_matrix(p.l[j])
        M = np.linalg.matrix_power(D, r) / p.box.edge[j] ** r
        c = apply_axis(c, M, j)
    return TensorPoly(p.box, c)


# ----------------------------------------------------------------------------
# projection


def _axis_matrix(l: int, n: int) -> np.ndarray:
    x, w = gauss_legendre(n)
    return ortho_basis(l)(x) * w[:, None]


def _check_order(f, l, order):
    deg = getattr(f, "degree", None)
    if deg is None:
        return
    deg = as_index(deg, len(l))
    for dj, lj in zip(deg, l):
        if 2 * order - 1 < dj + lj:
            warnings.warn(
                f"quadrature order {order} is not exact for a degree-{dj} oracle against degree-{lj} basis",
                stacklevel=3,
            )


def project(f: Callable, box: Box, l, order: int | None = None) -> TensorPoly:
    """L2-orthogonal projection of ``f`` onto polynomials of degree ``<= l`` over ``box``.

    Parameters
    ----------
    f : callable
        Vectorised oracle mapping points of shape ``(..., d)`` to values ``(...)``.
    box : Box
        Projection box ``a + delta * I^d``.
    l : int or sequence of int
        Degree bound per axis.
    order : int, optional
        Gauss nodes per axis, default ``max(l) + 3``.

    Returns
    -------
    TensorPoly
        Coefficients ``c_lam = int_{I^d} f(a + delta u) pi_lam(u) du``.
    """
    d = box.d
    l = as_index(l, d)
    order = order or default_order(l)
    _check_order(f, l, order)
    x, _ = gauss_legendre(order)
    grids = [box.corner[j] + box.edge[j] * x for j in range(d)]
    X = np.stack(np.meshgrid(*grids, indexing="ij"), axis=-1)
    c = np.asarray(f(X), dtype=float)
    for j in range(d):
        c = apply_axis(c, _axis_matrix(l[j], order), j)
    return TensorPoly(box, c)


def project_cells(f: Callable, kappa, l, order: int | None = None, lo=None, hi=None) -> np.ndarray:
    """Projection coefficients on every level-``kappa`` dyadic cell ``lo <= nu <= hi``.

    Returns an array of shape ``(N_1, ..., N_d, l_1+1, ..., l_d+1)`` where the
    leading axes run over the cells (default: the cells tiling the unit cube).
    Each slice is the coefficient tensor of the projection in the frame of its
    own cell.
    """
    kappa = as_index(kappa)
    d = len(kappa)
    l = as_index(l, d)
    order = order or default_order(l)
    _check_order(f, l, order)
    lo = (0,) * d if lo is None else as_index(lo, d)
    hi = tuple(2**k - 1 for k in kappa) if hi is None else as_index(hi, d)
    x, _ = gauss_legendre(order)
    grids = []
    for j in range(d):
        h = 2.0 ** -kappa[j]
        cells = np.arange(lo[j], hi[j] + 1)
        grids.append(((cells[:, None] + x[None, :]) * h).reshape(-1))
    X = np.stack(np.meshgrid(*grids, indexing="ij"), axis=-1)
    vals = np.asarray(f(X), dtype=float)
    shape = []
    for j in range(d):
        shape += [hi[j] - lo[j] + 1, order]
    vals = vals.reshape(shape)
    # contract node axes; after each contraction the degree axis is appended last
    for j in range(d):
        vals = np.tensordot(vals, _axis_matrix(l[j], order), axes=([j + 1], [0]))
    return vals


# ----------------------------------------------------------------------------
# 1-D operators lifted along an axis


class AxisOperator:
    """Linear operator on functions of one variable, lifted along one axis.

    ``op.apply(f, axis)`` returns the oracle ``x -> (op f(x_1, .., ., .., x_d))(x_axis)``.
    Operators support ``+``, ``-``, scalar ``*`` and composition ``@``
    (``(A @ B) f = A(B f)``).
    """

    def apply(self, f: Callable, axis: int) -> Callable:  # pragma: no cover - abstract
        raise NotImplementedError

    def __add__(self, other: "AxisOperator") -> "AxisOperator":
        return _Combination([(1.0, self), (1.0, other)])

    def __sub__(self, other: "AxisOperator") -> "AxisOperator":
        return _Combination([(1.0, self), (-1.0, other)])

    def __rmul__(self, s: float) -> "AxisOperator":
        return _Combination([(float(s), self)])

    def __matmul__(self, other: "AxisOperator") -> "AxisOperator":
        return _Composition(self, other)


class IdentityOp(AxisOperator):
    def apply(self, f, axis):
        return f


class MaskOp(AxisOperator):
    """Multiplication by the indicator of ``[lo, hi)`` along the axis."""

    def __init__(self, lo: float, hi: float):
        self.lo, self.hi = float(lo), float(hi)

    def apply(self, f, axis):
        def g(x):
            x = np.asarray(x, dtype=float)
            t = x[..., axis]
            return np.where((t >= self.lo) & (t < self.hi), f(x), 0.0)

        return g


class ProjectorOp(AxisOperator):
    """1-D L2 projection onto degree ``<= l`` over ``[a, a + delta]``."""

    def __init__(self, a: float, delta: float, l: int, order: int | None = None):
        if not delta > 0:
            raise ValueError("degenerate interval")
        self.a, self.delta, self.l = float(a), float(delta), int(l)
        self.order = order or self.l + 3

    def apply(self, f, axis):
        xq, _ = gauss_legendre(self.order)
        M = _axis_matrix(self.l, self.order)
        basis = ortho_basis(self.l)

        def g(x):
            x = np.asarray(x, dtype=float)
            xs = np.repeat(x[..., None, :], self.order, axis=-2)
            xs[..., axis] = self.a + self.delta * xq
            c = np.asarray(f(xs), dtype=float) @ M
            return np.sum(c * basis((x[..., axis] - self.a) / self.delta), axis=-1)

        return g


class _Combination(AxisOperator):
    def __init__(self, terms):
        flat = []
        for s, op in terms:
            if isinstance(op, _Combination):
                flat += [(s * s2, op2) for s2, op2 in op.terms]
            else:
                flat.append((s, op))
        self.terms = flat

    def apply(self, f, axis):
        parts = [(s, op.apply(f, axis)) for s, op in self.terms]

        def g(x):
            return sum(s * h(x) for s, h in parts)

        return g


class _Composition(AxisOperator):
    def __init__(self, outer: AxisOperator, inner: AxisOperator):
        self.outer, self.inner = outer, inner

    def apply(self, f, axis):
        return self.outer.apply(self.inner.apply(f, axis), axis)


def tensor_apply(ops: Sequence[AxisOperator], f: Callable, order: Sequence[int] | None = None) -> Callable:
    """Apply ``ops[j]`` along axis ``j`` for every axis; ``order`` fixes the sequence."""
    order = range(len(ops)) if order is None else order
    g = f
    for j in order:
        g = ops[j].apply(g, j)
    return g


def masked_project(f: Callable, proj_box: Box, mask_box: Box, l, order: int | None = None) -> Callable:
    """``x -> 1_{mask_box}(x) * (P f)(x)`` with ``P`` the projection over ``proj_box``."""
    p = project(f, proj_box, l, order)

    def g(x):
        x = np.asarray(x, dtype=float)
        return np.where(mask_box.contains(x), p(x), 0.0)

    g.poly = p
    return g
