"""Cardinal B-splines psi^{1,m}, their tensor products and dyadic shifts.

``psi^{1,0}`` is the indicator of ``[0, 1)`` and ``psi^{1,m}`` is obtained by
convolving ``psi^{1,m-1}`` with it. Each generator is stored exactly as a table
of rational polynomial coefficients, one row per knot interval ``[k, k+1)``, in
the local variable ``u = x - k``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np

from . import _kernels
from .index import Box, IntBox, as_index

__all__ = [
    "SplineGen",
    "RefinementMask",
    "spline_gen",
    "eval_psi",
    "refinement_coeffs",
    "eval_g",
    "support_g",
    "interacting_indices",
]


def _poly_integral(c: list[Fraction]) -> list[Fraction]:
    """Antiderivative vanishing at 0, ascending coefficients."""
    return [Fraction(0)] + [ci / (i + 1) for i, ci in enumerate(c)]


def _poly_at(c: list[Fraction], u: Fraction) -> Fraction:
    acc = Fraction(0)
    for ci in reversed(c):
        acc = acc * u + ci
    return acc


def _poly_deriv(c: list[Fraction]) -> list[Fraction]:
    return [i * c[i] for i in range(1, len(c))] or [Fraction(0)]


@lru_cache(maxsize=None)
def _exact_table(m: int) -> tuple[tuple[Fraction, ...], ...]:
    if m == 0:
        return ((Fraction(1),),)
    prev = [list(r) for r in _exact_table(m - 1)]
    zero = [Fraction(0)] * (m)
    rows = []
    for k in range(m + 1):
        # psi_m(k+u) = int_u^1 P_{k-1}(s) ds + int_0^u P_k(s) ds
        left = prev[k - 1] if 1 <= k <= m else zero
        right = prev[k] if k <= m - 1 else zero
        Ll = _poly_integral(left)
        Lr = _poly_integral(right)
        row = [Fraction(0)] * (m + 1)
        row[0] += _poly_at(Ll, Fraction(1))
        for i, c in enumerate(Ll):
            row[i] -= c
        for i, c in enumerate(Lr):
            row[i] += c
        rows.append(tuple(row))
    return tuple(rows)


@dataclass(frozen=True)
class SplineGen:
    """``psi^{1,m}`` as exact per-interval coefficients on knots ``0..m+1``.

    ``exact[k][i]`` is the coefficient of ``u**i`` on ``[k, k+1)``.
    """

    m: int
    exact: tuple[tuple[Fraction, ...], ...]

    @property
    def knots(self) -> np.ndarray:
        return np.arange(self.m + 2, dtype=float)

    def exact_derivative(self, lam: int) -> tuple[tuple[Fraction, ...], ...]:
        rows = [list(r) for r in self.exact]
        for _ in range(lam):
            rows = [_poly_deriv(r) for r in rows]
        return tuple(tuple(r) for r in rows)

    def table(self, lam: int = 0) -> np.ndarray:
        return _float_table(self.m, lam)

    def __call__(self, x, lam: int = 0) -> np.ndarray:
        return eval_psi(self.m, lam, x)


@lru_cache(maxsize=None)
def spline_gen(m: int) -> SplineGen:
    if m < 0:
        raise ValueError("spline order must be nonnegative")
    return SplineGen(m, _exact_table(m))


@lru_cache(maxsize=None)
def _float_table(m: int, lam: int) -> np.ndarray:
    rows = spline_gen(m).exact_derivative(lam)
    t = np.array([[float(c) for c in r] for r in rows], dtype=float)
    t.setflags(write=False)
    return t


def eval_psi(m: int, lam: int, x) -> np.ndarray:
    """Evaluate the ``lam``-th derivative of ``psi^{1,m}``.

    Parameters
    ----------
    m : int
        Spline order; the support is ``[0, m+1]``.
    lam : int
        Derivative order, ``0 <= lam <= m``. For ``lam == m`` the derivative is
        piecewise constant and is taken right-continuous at the knots.
    x : array_like
        Evaluation points.

    Returns
    -------
    ndarray
        Values with the shape of ``x``.
    """
    if lam < 0 or lam > m:
        raise ValueError(f"derivative order {lam} not available for spline order {m}")
    return _kernels.piecewise_eval(_float_table(m, lam), x)


@dataclass(frozen=True)
class RefinementMask:
    """Two-scale coefficients ``a_mu = 2^-m C(m+1, mu)``, ``mu = 0..m+1``."""

    m: int
    exact: tuple[Fraction, ...]

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([float(a) for a in self.exact])

    def __getitem__(self, mu: int) -> float:
        if 0 <= mu <= self.m + 1:
            return float(self.exact[mu])
        return 0.0

    def parity_sums(self) -> tuple[Fraction, Fraction]:
        return sum(self.exact[0::2], Fraction(0)), sum(self.exact[1::2], Fraction(0))


@lru_cache(maxsize=None)
def refinement_coeffs(m: int) -> RefinementMask:
    if m < 0:
        raise ValueError("spline order must be nonnegative")
    return RefinementMask(m, tuple(Fraction(comb(m + 1, mu), 2**m) for mu in range(m + 2)))


def eval_g(kappa, nu, m, x, lam=None) -> np.ndarray:
    """Evaluate ``g_{kappa,nu}(x) = prod_j psi^{1,m_j}(2^kappa_j x_j - nu_j)``.

    ``x`` has shape ``(..., d)``. With ``lam`` given, returns the mixed
    derivative ``D^lam g_{kappa,nu}`` instead.
    """
    kappa = as_index(kappa)
    d = len(kappa)
    nu = as_index(nu, d)
    m = as_index(m, d)
    lam = (0,) * d if lam is None else as_index(lam, d)
    x = np.asarray(x, dtype=float)
    out = np.ones(x.shape[:-1])
    for j in range(d):
        s = 2.0 ** kappa[j]
        out = out * (s ** lam[j]) * eval_psi(m[j], lam[j], s * x[..., j] - nu[j])
    return out


def support_g(kappa, nu, m) -> Box:
    """Closed support box ``2^-kappa nu + 2^-kappa (m+1) [0,1]^d``."""
    kappa = as_index(kappa)
    d = len(kappa)
    nu = as_index(nu, d)
    m = as_index(m, d)
    h = [2.0 ** -k for k in kappa]
    return Box(tuple(v * e for v, e in zip(nu, h)), tuple((mj + 1) * e for mj, e in zip(m, h)))


def interacting_indices(kappa, m, cell) -> IntBox:
    """Indices ``nu`` whose ``g_{kappa,nu}`` meets the cell ``Q_{kappa,cell}``."""
    kappa = as_index(kappa)
    d = len(kappa)
    m = as_index(m, d)
    cell = as_index(cell, d)
    if any(not 0 <= c < 2**k for c, k in zip(cell, kappa)):
        raise ValueError(f"cell index {cell} outside the level-{kappa} grid of the cube")
    return IntBox(tuple(c - mj for c, mj in zip(cell, m)), cell)
