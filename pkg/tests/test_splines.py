import itertools
from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mixext.index import IntBox
from mixext.splines import eval_g, eval_psi, interacting_indices, refinement_coeffs, spline_gen, support_g


@pytest.mark.parametrize("m", range(7))
def test_mask_is_binomial(m):
    # a_mu = 2^-m C(m+1, mu), written down independently
    expected = [Fraction(comb(m + 1, mu), 2**m) for mu in range(m + 2)]
    assert list(refinement_coeffs(m).exact) == expected


@pytest.mark.parametrize("m", range(9))
def test_mask_parity_sums_exact(m):
    assert refinement_coeffs(m).parity_sums() == (Fraction(1), Fraction(1))


@pytest.mark.parametrize(
    "m, lam, x, value",
    [
        (0, 0, 0.5, 1.0),
        (1, 0, 1.0, 1.0),
        (1, 0, 0.25, 0.25),
        (2, 0, 1.5, 0.75),
        (2, 0, 1.0, 0.5),
        (3, 0, 2.0, 2.0 / 3.0),
        (3, 0, 1.0, 1.0 / 6.0),
        (3, 1, 1.0, 0.5),
        (3, 2, 2.0, -2.0),
        (2, 1, 0.5, 0.5),
    ],
)
def test_cardinal_spline_values(m, lam, x, value):
    # closed forms of the uniform B-splines on knots 0..m+1
    assert float(eval_psi(m, lam, np.array([x]))[0]) == pytest.approx(value, abs=1e-14)


@pytest.mark.parametrize("m", range(6))
def test_refinement_identity(m, rng):
    x = rng.uniform(-0.5, m + 1.5, 500)
    a = refinement_coeffs(m).coeffs
    rhs = sum(a[mu] * eval_psi(m, 0, 2 * x - mu) for mu in range(m + 2))
    assert np.abs(eval_psi(m, 0, x) - rhs).max() <= 1e-12


@pytest.mark.parametrize("m", range(5))
def test_integral_is_one(m):
    # Gauss rule per knot interval is exact for the polynomial pieces
    u, w = np.polynomial.legendre.leggauss(m + 1)
    total = sum(np.sum(w / 2 * eval_psi(m, 0, k + (u + 1) / 2)) for k in range(m + 1))
    assert total == pytest.approx(1.0, abs=1e-14)


@given(st.integers(1, 2), st.data())
def test_partition_of_unity(d, data):
    m = tuple(data.draw(st.integers(0, 3)) for _ in range(d))
    kappa = tuple(data.draw(st.integers(0, 4)) for _ in range(d))
    x = np.random.default_rng(data.draw(st.integers(0, 2**16))).random((300, d))
    s = sum(eval_g(kappa, nu, m, x) for nu in IntBox(tuple(-v for v in m), tuple(2**k - 1 for k in kappa)))
    assert np.abs(s - 1).max() <= 1e-12


def test_support_and_interaction():
    S = support_g((2,), (1,), (2,))
    assert S.corner == (0.25,) and S.upper == (1.0,)
    ib = interacting_indices((2,), (2,), (1,))
    assert (ib.lo, ib.hi) == ((-1,), (1,))


@pytest.mark.parametrize("m", range(1, 5))
def test_exact_derivative_tables_match_finite_differences(m):
    g = spline_gen(m)
    x = np.linspace(0.05, m + 0.95, 41)
    x = x[np.abs(x - np.round(x)) > 1e-3]  # stay away from knots
    step = 1e-6
    fd = (eval_psi(m, 0, x + step) - eval_psi(m, 0, x - step)) / (2 * step)
    assert np.abs(eval_psi(m, 1, x) - fd).max() < 1e-6
    assert g.table(0).shape == (m + 1, m + 1)


def test_dyadic_derivative_scaling():
    x = np.linspace(0.3, 0.7, 9)[:, None]
    a = eval_g((3,), (2,), (3,), x, lam=(1,))
    b = 8.0 * eval_psi(3, 1, 8.0 * x[:, 0] - 2)
    assert np.abs(a - b).max() < 1e-12
