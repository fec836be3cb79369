import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mixext.extension import global_detail, random_pprime, zero_extend
from mixext.catalog import get
from mixext.index import IntBox
from mixext.piecewise import PiecewisePoly, support_box_Qm
from mixext.polyproj import ortho_basis
from mixext.splines import eval_g


def _random_family(rng, d, kappa, m, deg):
    n = tuple(2**k + mj for k, mj in zip(kappa, m))
    return PiecewisePoly(kappa, m, rng.standard_normal(n + tuple(g + 1 for g in deg)))


def _naive(F, X):
    """sum_nu g_nu(x) f_nu(x), written from the definition."""
    out = np.zeros(len(X))
    for nu in F.indices:
        out += eval_g(F.kappa, nu, F.m, X) * F.poly(nu)(X)
    return out


@pytest.mark.parametrize("d", [1, 2])
def test_evaluation_matches_definition(d, rng):
    F = _random_family(rng, d, (2, 1)[:d], (2, 1)[:d], (1, 2)[:d])
    X = rng.uniform(-1.5, 2.0, (300, d))
    assert np.abs(F(X) - _naive(F, X)).max() <= 1e-11
    assert np.abs(F.evaluate_direct(X) - F(X)).max() <= 1e-11


@given(st.integers(1, 2), st.integers(0, 2**16))
def test_refinement_is_exact(d, seed):
    rng = np.random.default_rng(seed)
    F = _random_family(rng, d, (1,) * d, (2,) * d, (1,) * d)
    G = F.refine_to((3,) * d)
    X = rng.uniform(-1.0, 1.5, (100, d))
    assert np.abs(F(X) - G(X)).max() <= 1e-10 * max(1.0, np.abs(F(X)).max())


@given(st.integers(1, 2), st.integers(0, 2**16), st.data())
def test_coefficients_recovered_from_samples(d, seed, data):
    rng = np.random.default_rng(seed)
    kappa = tuple(data.draw(st.integers(0, 3 if d == 1 else 2)) for _ in range(d))
    m = tuple(data.draw(st.integers(1, 3)) for _ in range(d))
    deg = tuple(data.draw(st.integers(0, mj - 1)) for mj in m)
    F = _random_family(rng, d, kappa, m, deg)
    grids = F.sample_grids()
    assert np.abs(F.fit_grid(grids, F.grid_values(grids)) - F.coef).max() <= 1e-8


def test_derivative_matches_finite_difference(rng):
    F = _random_family(rng, 1, (2,), (2,), (2,))
    x = rng.uniform(-0.4, 1.2, 50)
    x = x[np.abs(x * 4 - np.round(x * 4)) > 1e-3][:, None]
    step = 1e-6
    fd = (F(x + step) - F(x - step)) / (2 * step)
    assert np.abs(F(x, (1,)) - fd).max() < 1e-5 * max(1.0, np.abs(fd).max())


def test_support_box_and_vanishing(rng):
    F = _random_family(rng, 2, (2, 2), (2, 1), (1, 1))
    S = F.support()
    W = support_box_Qm((2, 1))
    # support of the level-(2,2) family: [-m 2^-k, 1 + ...] per axis, inside the common box
    assert S.corner == (-0.5, -0.25)
    assert W.contains_box(S)
    X = np.array([[S.upper[0] + 0.1, 0.5], [0.5, S.corner[1] - 0.01]])
    assert np.all(F(X) == 0.0)


def test_cube_only_restricts():
    F = global_detail((1,), (2,), (2,), zero_extend(get("sin", 1)))
    G = F.copy_with(F.coef, cube_only=True)
    X = np.array([[-0.5], [0.5], [1.5]])
    v = G(X)
    assert v[0] == 0.0 and v[2] == 0.0 and v[1] == pytest.approx(float(F(X[1:2])[0]))


def test_lq_norm_constant_family():
    # coefficient 1 on pi_0 everywhere: the blend is the partition of unity
    kappa, m = (2,), (1,)
    C = np.zeros((2**2 + 1, 1))
    C[:, 0] = 1.0
    F = PiecewisePoly(kappa, m, C)
    assert F.lq_norm(2.0, domain="cube") == pytest.approx(1.0, abs=1e-13)
    assert F.lq_norm(np.inf, domain="cube") == pytest.approx(1.0, abs=1e-13)


def test_serialization_roundtrip(rng):
    F = _random_family(rng, 2, (1, 2), (1, 1), (1, 0))
    G = PiecewisePoly.from_json(F.to_json())
    assert np.array_equal(F.coef, G.coef) and F.kappa == G.kappa and F.m == G.m
    assert json.loads(F.to_json())["schema"] == 1


def test_addition_aligns_index_ranges(rng):
    F = random_pprime((2,), (1,), (1,), rng)
    G = F.trimmed()
    X = rng.uniform(-0.5, 1.5, (50, 1))
    assert np.abs((F + G)(X) - 2 * F(X)).max() < 1e-12
    assert np.abs((F - F)(X)).max() == 0.0
