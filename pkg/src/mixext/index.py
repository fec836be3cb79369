"""Multi-indices, integer boxes, binary masks and dyadic cells.

Multi-indices are plain tuples of ints. Axes are 0-based in code; reports
convert to 1-based where they name an axis.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "as_index",
    "support_set",
    "indicator_vector",
    "min_coord",
    "plus",
    "leq",
    "IntBox",
    "Box",
    "dyadic_cell",
    "binary_masks",
    "masks_within",
    "ones",
    "zeros",
]


def as_index(x, d: int | None = None) -> tuple[int, ...]:
    """Coerce an int or sequence of ints to a tuple, broadcasting scalars to length ``d``."""
    if np.isscalar(x):
        if d is None:
            return (int(x),)
        return (int(x),) * d
    out = tuple(int(v) for v in x)
    if d is not None and len(out) != d:
        raise ValueError(f"expected {d} entries, got {len(out)}")
    if len(out) == 0:
        raise ValueError("multi-index must have at least one entry")
    return out


def ones(d: int) -> tuple[int, ...]:
    return (1,) * d


def zeros(d: int) -> tuple[int, ...]:
    return (0,) * d


def support_set(x: Sequence[int]) -> frozenset[int]:
    """Set of (0-based) axes where ``x`` is nonzero."""
    return frozenset(j for j, v in enumerate(x) if v != 0)


def indicator_vector(J: Iterable[int], d: int) -> tuple[int, ...]:
    """Indicator of the axis set ``J`` (0-based) as a length-``d`` tuple."""
    J = set(J)
    bad = [j for j in J if not 0 <= j < d]
    if bad:
        raise ValueError(f"axes {sorted(bad)} out of range for d={d}")
    return tuple(1 if j in J else 0 for j in range(d))


def min_coord(y: Sequence[float]):
    if len(y) == 0:
        raise ValueError("empty vector")
    return min(y)


def plus(x: Sequence[int]) -> tuple[int, ...]:
    return tuple(max(v, 0) for v in x)


def leq(x: Sequence[int], y: Sequence[int]) -> bool:
    """Componentwise ``x <= y``."""
    return all(a <= b for a, b in zip(x, y))


@dataclass(frozen=True)
class IntBox:
    """The integer box ``{nu : lo <= nu <= hi}``."""

    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise ValueError("lo and hi differ in dimension")

    @property
    def d(self) -> int:
        return len(self.lo)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(max(h - l + 1, 0) for l, h in zip(self.lo, self.hi))

    def __len__(self) -> int:
        return int(np.prod(self.shape))

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        if len(self) == 0:
            return iter(())
        return itertools.product(*(range(l, h + 1) for l, h in zip(self.lo, self.hi)))

    def __contains__(self, nu) -> bool:
        return all(l <= v <= h for l, v, h in zip(self.lo, nu, self.hi))

    def offset(self, nu) -> tuple[int, ...]:
        """Position of ``nu`` in the row-major array spanning this box."""
        return tuple(v - l for v, l in zip(nu, self.lo))


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``corner + edge * I^d``."""

    corner: tuple[float, ...]
    edge: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "corner", tuple(float(c) for c in self.corner))
        object.__setattr__(self, "edge", tuple(float(e) for e in self.edge))
        if len(self.corner) != len(self.edge):
            raise ValueError("corner and edge differ in dimension")
        if any(not e > 0 for e in self.edge):
            raise ValueError(f"degenerate box with edges {self.edge}")

    @property
    def d(self) -> int:
        return len(self.corner)

    @property
    def upper(self) -> tuple[float, ...]:
        return tuple(c + e for c, e in zip(self.corner, self.edge))

    @property
    def volume(self) -> float:
        return float(np.prod(self.edge))

    def contains(self, x, closed: bool = False) -> np.ndarray:
        """Membership of points ``x`` (shape ``(..., d)``); half-open unless ``closed``."""
        x = np.asarray(x, dtype=float)
        lo = np.asarray(self.corner)
        hi = np.asarray(self.upper)
        if closed:
            inside = (x >= lo) & (x <= hi)
        else:
            inside = (x >= lo) & (x < hi)
        return np.all(inside, axis=-1)

    def contains_box(self, other: "Box", tol: float = 1e-12) -> bool:
        return all(
            c0 - tol <= c1 and c1 + e1 <= c0 + e0 + tol
            for c0, e0, c1, e1 in zip(self.corner, self.edge, other.corner, other.edge)
        )

    def intersects(self, other: "Box") -> bool:
        """Whether the open interiors meet."""
        return all(
            max(c0, c1) < min(c0 + e0, c1 + e1)
            for c0, e0, c1, e1 in zip(self.corner, self.edge, other.corner, other.edge)
        )

    def to_local(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=float) - np.asarray(self.corner)) / np.asarray(self.edge)

    def to_global(self, u) -> np.ndarray:
        return np.asarray(self.corner) + np.asarray(u, dtype=float) * np.asarray(self.edge)


def dyadic_cell(kappa: Sequence[int], nu: Sequence[int]) -> Box:
    """The cell ``2^-kappa nu + 2^-kappa I^d``."""
    kappa = as_index(kappa)
    nu = as_index(nu, len(kappa))
    if any(k < 0 for k in kappa):
        raise ValueError("levels must be nonnegative")
    h = tuple(2.0 ** -k for k in kappa)
    return Box(tuple(v * e for v, e in zip(nu, h)), h)


def binary_masks(d: int) -> list[tuple[int, ...]]:
    """All of ``{0,1}^d`` in lexicographic order."""
    return [tuple(e) for e in itertools.product((0, 1), repeat=d)]


def masks_within(kappa: Sequence[int]) -> list[tuple[int, ...]]:
    """Binary masks whose support lies inside the support of ``kappa``."""
    return [eps for eps in binary_masks(len(kappa)) if all(k > 0 or e == 0 for e, k in zip(eps, kappa))]
