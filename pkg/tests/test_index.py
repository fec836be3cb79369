import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mixext.index import (
    Box,
    IntBox,
    as_index,
    binary_masks,
    dyadic_cell,
    indicator_vector,
    leq,
    masks_within,
    min_coord,
    plus,
    support_set,
)

small_vec = st.lists(st.integers(-5, 5), min_size=1, max_size=4)


def test_as_index_broadcast_and_errors():
    assert as_index(3, 2) == (3, 3)
    assert as_index([1, 2]) == (1, 2)
    with pytest.raises(ValueError):
        as_index([1, 2], 3)


def test_indicator_and_support_examples():
    assert indicator_vector({0, 2}, 3) == (1, 0, 1)
    assert support_set((0, 4, 0, -1)) == frozenset({1, 3})
    assert plus((-1, 2, 0)) == (0, 2, 0)
    assert min_coord((3.0, 0.5, 2.0)) == 0.5
    with pytest.raises(ValueError):
        indicator_vector({3}, 3)


@pytest.mark.parametrize("d", range(1, 6))
def test_indicator_support_bijection(d):
    subsets = [frozenset(c) for r in range(d + 1) for c in itertools.combinations(range(d), r)]
    images = {indicator_vector(J, d) for J in subsets}
    assert images == set(binary_masks(d))
    assert all(support_set(indicator_vector(J, d)) == J for J in subsets)


@given(small_vec, st.data())
def test_partial_order_is_antisymmetric_and_transitive(x, data):
    d = len(x)
    y = data.draw(st.lists(st.integers(-5, 5), min_size=d, max_size=d))
    z = data.draw(st.lists(st.integers(-5, 5), min_size=d, max_size=d))
    if leq(x, y) and leq(y, x):
        assert tuple(x) == tuple(y)
    if leq(x, y) and leq(y, z):
        assert leq(x, z)


@given(small_vec, st.data())
def test_intbox_enumerates_product(lo, data):
    hi = data.draw(st.lists(st.integers(-5, 5), min_size=len(lo), max_size=len(lo)))
    box = IntBox(tuple(lo), tuple(hi))
    pts = list(box)
    expected = int(np.prod([max(h - l + 1, 0) for l, h in zip(lo, hi)]))
    assert len(pts) == expected == int(np.prod(box.shape))
    assert all(leq(lo, p) and leq(p, hi) for p in pts)


def test_dyadic_cell_geometry():
    c = dyadic_cell((2, 0), (3, -1))
    assert c.corner == (0.75, -1.0)
    assert c.edge == (0.25, 1.0)
    assert c.upper == (1.0, 0.0)
    assert c.volume == pytest.approx(0.25)


def test_dyadic_cells_tile_unit_cube():
    kappa = (2, 1)
    cells = [dyadic_cell(kappa, nu) for nu in IntBox((0, 0), (3, 1))]
    assert sum(c.volume for c in cells) == pytest.approx(1.0)
    x = np.random.default_rng(0).random((500, 2))
    hits = sum(c.contains(x).astype(int) for c in cells)
    assert np.all(hits == 1)


def test_box_containment():
    a = Box((0.0, 0.0), (1.0, 1.0))
    b = Box((0.25, 0.5), (0.5, 0.25))
    assert a.contains_box(b) and not b.contains_box(a)
    assert a.intersects(b)
    assert not a.intersects(Box((2.0, 0.0), (1.0, 1.0)))
    u = np.array([[0.5, 0.5]])
    assert np.allclose(b.to_local(b.to_global(u)), u)


def test_masks_within():
    assert sorted(masks_within((0, 3))) == [(0, 0), (0, 1)]
    assert len(masks_within((1, 1, 2))) == 8
