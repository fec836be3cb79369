import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mixext.index import Box
from mixext.polyproj import (
    IdentityOp,
    MaskOp,
    ProjectorOp,
    TensorPoly,
    derivative_matrix,
    gauss_legendre,
    masked_project,
    ortho_basis,
    project,
    tensor_apply,
    transfer_matrix,
)

SQ3 = np.sqrt(3.0)
SQ5 = np.sqrt(5.0)


def test_low_degree_basis_closed_form():
    u = np.linspace(-0.3, 1.2, 7)
    b = ortho_basis(2)(u)
    assert np.allclose(b[:, 0], 1.0, atol=1e-15)
    assert np.allclose(b[:, 1], SQ3 * (2 * u - 1), atol=1e-14)
    assert np.allclose(b[:, 2], SQ5 * (6 * u**2 - 6 * u + 1), atol=1e-13)
    assert np.allclose(ortho_basis(2)(u, 1)[:, 2], SQ5 * (12 * u - 6), atol=1e-13)


@pytest.mark.parametrize("l", range(11))
def test_orthonormal(l):
    assert np.abs(ortho_basis(l).gram(l + 3) - np.eye(l + 1)).max() <= 1e-12


@pytest.mark.parametrize("n", [1, 3, 8])
def test_gauss_legendre_exactness(n):
    x, w = gauss_legendre(n)
    for k in range(2 * n):
        assert np.sum(w * x**k) == pytest.approx(1.0 / (k + 1), abs=1e-14)


def test_derivative_matrix_reproduces_derivative():
    l = 5
    D = derivative_matrix(l)
    u = np.linspace(0, 1, 11)
    b = ortho_basis(l)
    assert np.abs(b(u, 1) - b(u) @ D.T).max() < 1e-11


def test_transfer_matrix_reexpands():
    l, scale, shift = 3, 0.5, 0.25
    c = np.array([0.3, -1.0, 2.0, 0.5])
    v = np.linspace(-0.5, 1.5, 9)
    b = ortho_basis(l)
    lhs = b(shift + scale * v) @ c
    rhs = b(v) @ (c @ transfer_matrix(l, scale, shift))
    assert np.abs(lhs - rhs).max() < 1e-12


def test_projection_of_square_is_x_minus_sixth():
    P = project(lambda X: X[..., 0] ** 2, Box((0.0,), (1.0,)), 1)
    x = np.linspace(-1, 2, 13)
    assert np.abs(P(x[:, None]) - (x - 1 / 6)).max() < 1e-13


def test_projection_of_square_on_shifted_box():
    # best linear fit of x^2 on [a, a+h] is x*(2a+h) - (a^2 + a h + h^2/6)
    a, h = 0.3, 0.4
    P = project(lambda X: X[..., 0] ** 2, Box((a,), (h,)), 1)
    x = np.linspace(a, a + h, 5)
    assert np.abs(P(x[:, None]) - (x * (2 * a + h) - (a * a + a * h + h * h / 6))).max() < 1e-13


@given(st.integers(1, 2), st.data())
def test_projector_reproduces_polynomials(d, data):
    l = tuple(data.draw(st.integers(0, 3)) for _ in range(d))
    rng = np.random.default_rng(data.draw(st.integers(0, 2**16)))
    box = Box(tuple(rng.uniform(-1, 1, d)), tuple(rng.uniform(0.1, 2, d)))
    p = TensorPoly(box, rng.standard_normal(tuple(v + 1 for v in l)))
    X = np.asarray(box.corner) + np.asarray(box.edge) * rng.uniform(-0.5, 1.5, (30, d))
    assert np.abs(project(p, box, l)(X) - p(X)).max() <= 1e-10


@given(st.integers(0, 4), st.integers(0, 2**16))
def test_projector_is_idempotent(l, seed):
    rng = np.random.default_rng(seed)
    k = rng.uniform(1, 6)
    f = lambda X: np.sin(k * X[..., 0]) + X[..., 0] ** 5
    box = Box((rng.uniform(-1, 1),), (rng.uniform(0.1, 1.0),))
    P = project(f, box, l)
    PP = project(P, box, l)
    assert np.abs(P.coef - PP.coef).max() <= 1e-12


def test_projector_kernel():
    box = Box((0.2,), (0.5,))
    high = lambda X: ortho_basis(3)((X[..., 0] - 0.2) / 0.5)[..., 3]
    assert np.abs(project(high, box, 2).coef).max() <= 1e-13


def test_tensor_order_commutes(rng):
    f = lambda X: np.exp(X[..., 0]) * np.cos(2 * X[..., 1]) + X[..., 0] * X[..., 1] ** 3
    ops = [ProjectorOp(0.0, 0.5, 2), MaskOp(0.0, 0.75) @ ProjectorOp(0.25, 0.5, 1)]
    X = rng.uniform(-0.5, 1.5, (50, 2))
    a = tensor_apply(ops, f, order=(0, 1))(X)
    b = tensor_apply(ops, f, order=(1, 0))(X)
    assert np.abs(a - b).max() <= 1e-12


def test_operator_algebra(rng):
    f = lambda X: np.sin(3 * X[..., 0])
    P = ProjectorOp(0.0, 1.0, 1)
    X = rng.random((20, 1))
    zero = tensor_apply([P - P @ P], f)(X)
    assert np.abs(zero).max() <= 1e-12
    twice = tensor_apply([2.0 * IdentityOp()], f)(X)
    assert np.allclose(twice, 2 * f(X))


def test_masked_projector_matches_tensor_form(rng):
    # polynomial oracle: both quadratures are exact, so only roundoff remains
    f = lambda X: (1 + X[..., 0] ** 3) * (X[..., 1] ** 4 - X[..., 1])
    pb = Box((0.0, 0.25), (0.5, 0.5))
    mb = Box((0.0, 0.0), (1.0, 0.75))
    a = masked_project(f, pb, mb, (1, 2))
    ops = [MaskOp(0.0, 1.0) @ ProjectorOp(0.0, 0.5, 1), MaskOp(0.0, 0.75) @ ProjectorOp(0.25, 0.5, 2)]
    b = tensor_apply(ops, f)
    X = rng.uniform(-0.5, 1.5, (80, 2))
    assert np.abs(a(X) - b(X)).max() <= 1e-12


def test_tensorpoly_derivative_and_norm():
    box = Box((0.0,), (2.0,))
    p = project(lambda X: X[..., 0] ** 3, box, 3)
    dp = p.derivative((1,))
    x = np.linspace(0, 2, 7)[:, None]
    assert np.abs(dp(x) - 3 * x[:, 0] ** 2).max() < 1e-11
    # ||x^3||_{L2(0,2)} = sqrt(2^7 / 7)
    assert p.lp_norm(2.0) == pytest.approx(np.sqrt(2**7 / 7), rel=1e-12)
    assert p.lp_norm(np.inf) == pytest.approx(8.0, rel=1e-12)
