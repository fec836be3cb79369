"""Test functions with known derivatives and smoothness.

Every catalog function is a short sum of products of 1-D factors, so mixed
derivatives follow factor by factor.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import pi
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Factor",
    "Poly1D",
    "Sin1D",
    "AbsPow1D",
    "Step1D",
    "CatalogFunction",
    "catalog",
    "get",
    "random_trig",
]


class Factor:
    """A function of one variable with derivatives ``k = 0, 1, ...`` where they exist in ``L_p``."""

    def __call__(self, x, k: int = 0) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def smoothness(self, p: float) -> float:
        return np.inf

    def has_derivative(self, k: int, p: float) -> bool:
        return True

    def singular_points(self) -> tuple[float, ...]:
        return ()


@dataclass(frozen=True)
class Poly1D(Factor):
    coeffs: tuple[float, ...]

    def __call__(self, x, k: int = 0):
        c = np.polynomial.polynomial.polyder(np.asarray(self.coeffs, dtype=float), k) if k else np.asarray(self.coeffs, dtype=float)
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


@dataclass(frozen=True)
class Sin1D(Factor):
    freq: float
    phase: float = 0.0

    def __call__(self, x, k: int = 0):
        return self.freq**k * np.sin(self.freq * np.asarray(x, dtype=float) + self.phase + k * pi / 2)


@dataclass(frozen=True)
class AbsPow1D(Factor):
    """``|x - c|^beta`` with ``beta > 0`` not an even integer."""

    center: float
    beta: float

    def __call__(self, x, k: int = 0):
        x = np.asarray(x, dtype=float)
        y = x - self.center
        coef = 1.0
        for i in range(k):
            coef *= self.beta - i
        with np.errstate(divide="ignore", invalid="ignore"):
            v = coef * np.abs(y) ** (self.beta - k) * np.sign(y) ** k
        return np.where(y == 0, 0.0 if self.beta > k else np.inf, v)

    def smoothness(self, p: float) -> float:
        return self.beta + 1.0 / p

    def has_derivative(self, k: int, p: float) -> bool:
        return self.beta - k > -1.0 / p

    def singular_points(self):
        return (self.center,)


@dataclass(frozen=True)
class Step1D(Factor):
    """Indicator of ``x >= c``: bounded variation, no weak derivative."""

    center: float

    def __call__(self, x, k: int = 0):
        if k:
            raise ValueError("step has no weak derivative")
        return (np.asarray(x, dtype=float) >= self.center).astype(float)

    def smoothness(self, p: float) -> float:
        return 1.0 / p

    def has_derivative(self, k: int, p: float) -> bool:
        return k == 0

    def singular_points(self):
        return (self.center,)


@dataclass
class CatalogFunction:
    """Named test function ``sum_t c_t prod_j factor_{t,j}(x_j)``.

    Attributes
    ----------
    tag : str
        Smoothness class label (``smooth``, ``polynomial``, ``finite``, ``bv``).
    """

    name: str
    terms: list
    tag: str
    d: int = field(init=False)

    def __post_init__(self):
        self.d = len(self.terms[0][1])

    def __call__(self, x) -> np.ndarray:
        return self.derivative((0,) * self.d)(x)

    @property
    def degree(self):
        if self.tag != "polynomial":
            return None
        return tuple(max(t[1][j].degree for t in self.terms) for j in range(self.d))

    def derivative(self, mu: Sequence[int]) -> Callable:
        """Oracle for the mixed derivative ``D^mu f``."""
        mu = tuple(int(v) for v in mu)

        def g(x):
            x = np.asarray(x, dtype=float)
            out = np.zeros(x.shape[:-1])
            for c, factors in self.terms:
                v = c * np.ones(x.shape[:-1])
                for j, fac in enumerate(factors):
                    v = v * fac(x[..., j], mu[j])
                out = out + v
            return out

        return g

    def smoothness(self, p: float) -> tuple[float, ...]:
        """Per-axis exponent ``s`` with ``f`` in the mixed Besov class for ``alpha < s``."""
        return tuple(min(fac[j].smoothness(p) for _, fac in self.terms) for j in range(self.d))

    def has_derivative(self, mu: Sequence[int], p: float) -> bool:
        return all(fac[j].has_derivative(k, p) for _, fac in self.terms for j, k in enumerate(mu))

    def singular_points(self, j: int) -> tuple[float, ...]:
        return tuple(sorted({s for _, fac in self.terms for s in fac[j].singular_points()}))

    def spot_check(self, rng: np.random.Generator, max_order: int = 2, p: float = 2.0, npts: int = 50, step: float = 1e-5) -> float:
        """Largest relative mismatch between derivative oracles and central differences."""
        worst = 0.0
        pts = []
        while len(pts) < npts:
            x = rng.uniform(0.05, 0.95, self.d)
            if all(all(abs(x[j] - s) > 0.02 for s in self.singular_points(j)) for j in range(self.d)):
                pts.append(x)
        X = np.array(pts)
        for j in range(self.d):
            for k in range(1, max_order + 1):
                mu = tuple(k if i == j else 0 for i in range(self.d))
                if not self.has_derivative(mu, p):
                    continue
                lower = self.derivative(tuple(k - 1 if i == j else 0 for i in range(self.d)))
                e = np.zeros(self.d)
                e[j] = step
                fd = (lower(X + e) - lower(X - e)) / (2 * step)
                exact = self.derivative(mu)(X)
                scale = np.maximum(np.abs(exact), 1.0)
                worst = max(worst, float(np.max(np.abs(fd - exact) / scale)))
        return worst


def _catalog_1d() -> list[CatalogFunction]:
    return [
        CatalogFunction("poly", [(1.0, (Poly1D((1.0, 1.0, -2.0, 0.5)),))], "polynomial"),
        CatalogFunction("sin", [(1.0, (Sin1D(2 * pi),))], "smooth"),
        CatalogFunction("exp_sin", [(1.0, (Sin1D(3.0, 0.4),)), (0.5, (Poly1D((0.0, 0.0, 1.0)),))], "smooth"),
        CatalogFunction("abs25", [(1.0, (AbsPow1D(0.5, 2.5),))], "finite"),
        CatalogFunction("abs15", [(1.0, (AbsPow1D(0.37, 1.5),))], "finite"),
        CatalogFunction("step", [(1.0, (Step1D(0.37),))], "bv"),
    ]


def _catalog_2d() -> list[CatalogFunction]:
    return [
        CatalogFunction(
            "poly",
            [(1.0, (Poly1D((1.0, 1.0, -2.0)), Poly1D((0.5, 1.0)))), (0.7, (Poly1D((0.0, 1.0)), Poly1D((0.0, 0.0, 0.0, 1.0))))],
            "polynomial",
        ),
        CatalogFunction("sin", [(1.0, (Sin1D(2 * pi), Sin1D(pi, 0.3)))], "smooth"),
        CatalogFunction("exp_sin", [(1.0, (Sin1D(3.0, 0.4), Sin1D(2.0, 1.0))), (0.5, (Poly1D((0.0, 0.0, 1.0)), Poly1D((1.0,))))], "smooth"),
        CatalogFunction("abs25", [(1.0, (AbsPow1D(0.5, 2.5), AbsPow1D(0.3, 2.5)))], "finite"),
        CatalogFunction("abs15", [(1.0, (AbsPow1D(0.37, 1.5), Sin1D(2.0)))], "finite"),
        CatalogFunction("step", [(1.0, (Step1D(0.37), Poly1D((1.0, 1.0))))], "bv"),
    ]


def catalog(d: int) -> list[CatalogFunction]:
    if d == 1:
        return _catalog_1d()
    if d == 2:
        return _catalog_2d()
    raise ValueError("catalog ships entries for d = 1 and d = 2")


def get(name: str, d: int) -> CatalogFunction:
    if name == "zero":
        return CatalogFunction("zero", [(0.0, tuple(Poly1D((0.0,)) for _ in range(d)))], "polynomial")
    for f in catalog(d):
        if f.name == name:
            return f
    raise KeyError(f"no catalog entry {name!r} for d={d}")


def random_trig(d: int, rng: np.random.Generator, nterms: int = 3, max_freq: float = 4.0) -> CatalogFunction:
    """Random smooth oracle: a short sum of tensor sinusoids."""
    terms = []
    for _ in range(nterms):
        c = float(rng.standard_normal())
        facs = tuple(Sin1D(float(rng.uniform(0.5, max_freq)), float(rng.uniform(0, 2 * pi))) for _ in range(d))
        terms.append((c, facs))
    return CatalogFunction("random_trig", terms, "smooth")
