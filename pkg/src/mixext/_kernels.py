"""Hot loops with a numba path and a plain numpy path.

Set ``MIXEXT_DISABLE_NUMBA=1`` in the environment before import to force the
numpy implementations (also used automatically when numba is missing).
"""
from __future__ import annotations

import itertools
import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("MIXEXT_DISABLE_NUMBA", "0").lower() not in ("1", "true", "yes")


def _njit(func):
    if HAVE_NUMBA:
        return numba.njit(cache=True)(func)
    return func


# ----------------------------------------------------------------------------
# piecewise polynomial on unit knot intervals [k, k+1), k = 0..n-1


def piecewise_eval_numpy(table, x):
    x = np.asarray(x, dtype=float)
    n, deg1 = table.shape
    k = np.floor(x)
    inside = (k >= 0) & (k < n)
    ki = np.where(inside, k, 0).astype(np.int64)
    u = x - k
    out = np.zeros_like(x)
    for i in range(deg1 - 1, -1, -1):
        out = out * u + table[ki, i]
    return np.where(inside, out, 0.0)


@_njit
def _piecewise_eval_nb(table, x):
    n = table.shape[0]
    deg1 = table.shape[1]
    out = np.empty(x.size)
    for p in range(x.size):
        xp = x[p]
        k = np.floor(xp)
        if k < 0 or k >= n:
            out[p] = 0.0
            continue
        ki = int(k)
        u = xp - k
        acc = 0.0
        for i in range(deg1 - 1, -1, -1):
            acc = acc * u + table[ki, i]
        out[p] = acc
    return out


def piecewise_eval_numba(table, x):
    x = np.asarray(x, dtype=float)
    flat = np.ascontiguousarray(x.reshape(-1))
    return _piecewise_eval_nb(np.ascontiguousarray(table, dtype=float), flat).reshape(x.shape)


# ----------------------------------------------------------------------------
# scattered evaluation of sum_nu prod_j V_j[p, o_j, i_j] * C[nu, i]
#
# V has shape (d, P, Omax, Lmax): per-axis factor tables for each point,
# offset o (candidate index along the axis) and basis degree i.
# IDX has shape (d, P, Omax): position of the candidate index along axis j in
# the coefficient array, or -1 if the candidate is absent.


def family_points_numpy(coef, V, IDX, noff, nlen):
    d, P = IDX.shape[0], IDX.shape[1]
    out = np.zeros(P)
    for offs in itertools.product(*(range(n) for n in noff)):
        idx = [IDX[j, :, offs[j]] for j in range(d)]
        valid = np.ones(P, dtype=bool)
        for ix in idx:
            valid &= ix >= 0
        if not valid.any():
            continue
        pts = np.nonzero(valid)[0]
        t = coef[tuple(ix[pts] for ix in idx)]  # (P', L_1, ..., L_d)
        for j in range(d - 1, -1, -1):
            t = np.einsum("p...i,pi->p...", t, V[j, pts, offs[j], : nlen[j]])
        out[pts] += t
    return out


@_njit
def _family_points_nb(coef, cstrides, V, IDX, noff, nlen):
    d = IDX.shape[0]
    P = IDX.shape[1]
    out = np.zeros(P)
    ocnt = np.zeros(d, np.int64)
    icnt = np.zeros(d, np.int64)
    for p in range(P):
        total = 0.0
        ocnt[:] = 0
        while True:
            valid = True
            base = 0
            for j in range(d):
                n = IDX[j, p, ocnt[j]]
                if n < 0:
                    valid = False
                    break
                base += n * cstrides[j]
            if valid:
                icnt[:] = 0
                while True:
                    prod = 1.0
                    off = base
                    for j in range(d):
                        prod *= V[j, p, ocnt[j], icnt[j]]
                        off += icnt[j] * cstrides[d + j]
                    total += prod * coef[off]
                    j = d - 1
                    while j >= 0:
                        icnt[j] += 1
                        if icnt[j] < nlen[j]:
                            break
                        icnt[j] = 0
                        j -= 1
                    if j < 0:
                        break
            j = d - 1
            while j >= 0:
                ocnt[j] += 1
                if ocnt[j] < noff[j]:
                    break
                ocnt[j] = 0
                j -= 1
            if j < 0:
                break
        out[p] = total
    return out


def family_points_numba(coef, V, IDX, noff, nlen):
    coef = np.ascontiguousarray(coef, dtype=float)
    cstrides = np.array([s // coef.itemsize for s in coef.strides], dtype=np.int64)
    return _family_points_nb(
        coef.reshape(-1),
        cstrides,
        np.ascontiguousarray(V, dtype=float),
        np.ascontiguousarray(IDX, dtype=np.int64),
        np.asarray(noff, dtype=np.int64),
        np.asarray(nlen, dtype=np.int64),
    )


if USE_NUMBA:
    piecewise_eval = piecewise_eval_numba
    family_points = family_points_numba
else:
    piecewise_eval = piecewise_eval_numpy
    family_points = family_points_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"
