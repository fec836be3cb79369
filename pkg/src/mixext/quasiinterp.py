"""Dyadic quasi-interpolants on the unit cube and their telescoped details.

Operator functions take the difference order ``l`` and work with polynomials of
degree ``l - 1`` per axis, so that ``l`` matches the order of the moduli used to
measure their error.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .index import Box, IntBox, as_index, dyadic_cell, masks_within, plus
from .piecewise import PiecewisePoly, apply_block_axis
from .polyproj import TensorPoly, default_order, frame_transfer, project, project_cells
from .splines import refinement_coeffs

__all__ = [
    "index_clamp",
    "CellGeometry",
    "cell_geometry",
    "local_projector_S",
    "quasi_interp_E",
    "telescoped_E",
    "detail_family",
    "derivative_level_bound_report",
    "lp_error",
]


def _clamp1(k: int, m: int, v: int) -> int:
    top = max(2**k - m - 1, 0)
    return top - max(top - max(v, 0), 0)


def index_clamp(kappa, m, nu) -> tuple[int, ...]:
    """Clamp ``nu`` in ``[-m, 2^kappa - 1]`` to a cell index of the cube grid.

    Indices in the low edge block map to 0 and those in the high edge block map
    to ``2^kappa - m - 1`` (or 0 when that is negative).
    """
    kappa = as_index(kappa)
    d = len(kappa)
    m = as_index(m, d)
    nu = as_index(nu, d)
    if any(not -mj <= v <= 2**k - 1 for mj, v, k in zip(m, nu, kappa)):
        raise ValueError(f"index {nu} outside [-m, 2^kappa - 1]")
    return tuple(_clamp1(k, mj, v) for k, mj, v in zip(kappa, m, nu))


@dataclass(frozen=True)
class CellGeometry:
    """Base cell ``D`` and wide cell ``D'`` attached to ``(kappa, nu, m)``."""

    kappa: tuple[int, ...]
    nu: tuple[int, ...]
    m: tuple[int, ...]

    @property
    def base_point(self) -> tuple[float, ...]:
        return tuple(2.0**-k * v for k, v in zip(self.kappa, plus(np.subtract(self.nu, self.m))))

    @property
    def edge(self) -> tuple[float, ...]:
        return tuple(min(2**k, mj + 1) * 2.0**-k for k, mj in zip(self.kappa, self.m))

    @property
    def D(self) -> Box:
        return Box(self.base_point, self.edge)

    @property
    def D_wide(self) -> Box:
        corner = tuple(
            2.0**-k * min(max(v - 2 * mj - 1, 0), max(2**k - 2 * mj - 3, 0))
            for k, v, mj in zip(self.kappa, self.nu, self.m)
        )
        edge = tuple(2.0**-k * min(2**k, 2 * mj + 3) for k, mj in zip(self.kappa, self.m))
        return Box(corner, edge)

    @property
    def Q(self) -> Box:
        return dyadic_cell(self.kappa, self.nu)


def cell_geometry(kappa, nu, m) -> CellGeometry:
    kappa = as_index(kappa)
    d = len(kappa)
    return CellGeometry(kappa, as_index(nu, d), as_index(m, d))


def local_projector_S(kappa, nu, l, m, f: Callable, order: int | None = None) -> TensorPoly:
    """Projection of ``f`` onto degree ``<= l`` polynomials over the base cell ``D``.

    With ``m = 0`` the base cell is the dyadic cell ``Q_{kappa,nu}`` itself.
    Here ``l`` is the polynomial degree.
    """
    kappa = as_index(kappa)
    d = len(kappa)
    nu = as_index(nu, d)
    if any(not 0 <= v < 2**k for v, k in zip(nu, kappa)):
        raise ValueError(f"cell index {nu} outside the cube grid at level {kappa}")
    geo = cell_geometry(kappa, nu, m)
    return project(f, geo.D, as_index(l, d), order)


# ----------------------------------------------------------------------------
# per-axis block maps from cell projections to home-frame coefficients


@lru_cache(maxsize=None)
def _clamp_map(k: int, m: int, deg: int) -> np.ndarray:
    """Block map from level-``k`` cell coefficients to indices ``-m..2^k-1``."""
    n_out, n_in = 2**k + m, 2**k
    A = np.zeros((n_out, deg + 1, n_in, deg + 1))
    h = 2.0**-k
    for a in range(n_out):
        nu = a - m
        c = _clamp1(k, m, nu)
        A[a, :, c, :] = frame_transfer(deg, c * h, h, nu * h, h).T
    A.setflags(write=False)
    return A


@lru_cache(maxsize=None)
def _parent_map(k: int, m: int, deg: int) -> np.ndarray:
    """Block map from level-``k-1`` cell coefficients through the refinement mask."""
    mask = refinement_coeffs(m)
    n_out, n_in = 2**k + m, 2 ** (k - 1)
    A = np.zeros((n_out, deg + 1, n_in, deg + 1))
    h, hp = 2.0**-k, 2.0 ** -(k - 1)
    for a in range(n_out):
        nu = a - m
        for rho in range(-m, 2 ** (k - 1)):
            mu = nu - 2 * rho
            if not 0 <= mu <= m + 1:
                continue
            c = _clamp1(k - 1, m, rho)
            A[a, :, c, :] += mask[mu] * frame_transfer(deg, c * hp, hp, nu * h, h).T
    A.setflags(write=False)
    return A


def _check_orders(l, m, d):
    l = as_index(l, d)
    m = as_index(m, d)
    if any(v < 1 for v in l):
        raise ValueError("difference order l must be >= 1 on every axis")
    if any(mj < lj - 1 for mj, lj in zip(m, l)):
        raise ValueError("spline order m must satisfy m >= l - 1")
    return l, m


def quasi_interp_E(kappa, l, m, f: Callable, order: int | None = None) -> PiecewisePoly:
    """Quasi-interpolant ``E_kappa f = sum_nu (S_{kappa, clamp(nu)} f) g_{kappa,nu}`` on the cube.

    Parameters
    ----------
    kappa : sequence of int
        Dyadic level.
    l : sequence of int
        Difference order; local polynomials have degree ``l - 1``.
    m : sequence of int
        Spline order, ``m >= l - 1``.
    f : callable
        Vectorised oracle on the unit cube.
    order : int, optional
        Gauss nodes per axis per cell.
    """
    kappa = as_index(kappa)
    d = len(kappa)
    l, m = _check_orders(l, m, d)
    deg = tuple(v - 1 for v in l)
    C = project_cells(f, kappa, deg, order or default_order(l))
    for j in range(d):
        C = apply_block_axis(C, j, _clamp_map(kappa[j], m[j], deg[j]))
    return PiecewisePoly(kappa, m, C, cube_only=True, meta={"operator": "E", "l": list(l)})


def detail_family(kappa, l, m, f: Callable, order: int | None = None) -> np.ndarray:
    """Coefficients of the detail polynomials ``U_{kappa,nu} f`` in their home frames.

    The inclusion-exclusion over parent levels is applied axis by axis: along
    an axis with ``eps_j = 1`` the parent-cell projections are pushed through
    the refinement mask, otherwise through the clamp.
    """
    kappa = as_index(kappa)
    d = len(kappa)
    l, m = _check_orders(l, m, d)
    deg = tuple(v - 1 for v in l)
    order = order or default_order(l)
    total = None
    for eps in masks_within(kappa):
        lev = tuple(k - e for k, e in zip(kappa, eps))
        C = project_cells(f, lev, deg, order)
        for j in range(d):
            A = _parent_map(kappa[j], m[j], deg[j]) if eps[j] else _clamp_map(kappa[j], m[j], deg[j])
            C = apply_block_axis(C, j, A)
        C = (-1) ** sum(eps) * C
        total = C if total is None else total + C
    return total


def telescoped_E(kappa, l, m, f: Callable, order: int | None = None) -> PiecewisePoly:
    """Level-``kappa`` detail ``sum_eps (-1)^|eps| E_{kappa-eps} f`` as one family at level ``kappa``."""
    kappa = as_index(kappa)
    d = len(kappa)
    l, m = _check_orders(l, m, d)
    C = detail_family(kappa, l, m, f, order)
    return PiecewisePoly(kappa, m, C, cube_only=True, meta={"operator": "detail", "l": list(l)})


# ----------------------------------------------------------------------------
# error and rate reporting


def _cube_grids(kappa, order: int, refine: int = 2):
    from .polyproj import gauss_legendre

    x, w = gauss_legendre(order)
    nodes, weights = [], []
    for k in kappa:
        nc = 2 ** (k + refine - 1)
        h = 1.0 / nc
        c = np.arange(nc) * h
        nodes.append((c[:, None] + h * x[None, :]).reshape(-1))
        weights.append(np.broadcast_to(h * w, (nc, x.size)).reshape(-1))
    return nodes, weights


def lp_error(f: Callable, F: PiecewisePoly, p: float, order: int = 8, refine: int = 2) -> float:
    """``||f - F||_{L_p(I^d)}`` by Gauss quadrature on the level grid refined ``2^(refine-1)`` times."""
    nodes, weights = _cube_grids(F.kappa, order, refine)
    X = np.stack(np.meshgrid(*nodes, indexing="ij"), axis=-1)
    err = np.abs(np.asarray(f(X)) - F.grid_values(nodes))
    if np.isinf(p):
        return float(err.max())
    W = weights[0]
    for w in weights[1:]:
        W = np.multiply.outer(W, w)
    return float(np.sum(W * err**p) ** (1.0 / p))


def derivative_level_bound_report(
    f: Callable,
    kappa,
    lam,
    p: float,
    q: float,
    l,
    m,
    scale: float = 1.0,
    order: int | None = None,
    modulus_kw: dict | None = None,
) -> dict:
    """Compare ``||D^lam detail_kappa f||_{L_q(I^d)}`` with its modulus bound.

    The bound is ``2^{(kappa, lam + (1/p - 1/q)_+)}`` times the averaged mixed
    modulus of order ``l`` on the active axes of ``kappa`` at step
    ``scale * 2^-kappa``. For ``kappa = 0`` the modulus is ``||f||_{L_p}``.
    """
    from .analysis import lp_norm_oracle, modulus_avg

    kappa = as_index(kappa)
    d = len(kappa)
    lam = as_index(lam, d)
    l = as_index(l, d)
    F = telescoped_E(kappa, l, m, f, order)
    lhs = F.lq_norm(q, lam, domain="cube", refine=2)
    J = [j for j in range(d) if kappa[j] > 0]
    gap = max(1.0 / p - 1.0 / q, 0.0)
    factor = 2.0 ** sum(k * (lj + gap) for k, lj in zip(kappa, lam))
    if J:
        order_vec = tuple(l[j] if j in J else 0 for j in range(d))
        t = tuple(scale * 2.0 ** -kappa[j] if j in J else 0.0 for j in range(d))
        mod = modulus_avg(f, order_vec, t, p, **(modulus_kw or {})).value
    else:
        mod = lp_norm_oracle(f, d, p)
    rhs = factor * mod
    return {
        "kappa": list(kappa),
        "lam": list(lam),
        "p": p,
        "q": q,
        "lhs": lhs,
        "modulus": mod,
        "rhs": rhs,
        "ratio": lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else float("inf")),
    }
