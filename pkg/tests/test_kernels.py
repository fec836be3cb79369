import os
import subprocess
import sys

import numpy as np
import pytest

from mixext import _kernels


def test_piecewise_backends_agree():
    rng = np.random.default_rng(0)
    table = rng.standard_normal((7, 4))
    x = rng.uniform(-1, 8, 1000)
    a = _kernels.piecewise_eval_numpy(table, x)
    if not _kernels.HAVE_NUMBA:
        pytest.skip("numba missing")
    assert np.array_equal(a, _kernels.piecewise_eval_numba(table, x))
    assert np.all(a[(x < 0) | (x >= 7)] == 0)


def test_env_flag_selects_numpy():
    code = "from mixext import _kernels; print(_kernels.BACKEND)"
    env = dict(os.environ, MIXEXT_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_family_evaluation_identical_across_backends():
    code = (
        "import numpy as np\n"
        "from mixext.catalog import get\n"
        "from mixext.extension import global_detail, zero_extend\n"
        "F = global_detail((3, 2), (2, 2), (2, 1), zero_extend(get('exp_sin', 2)))\n"
        "X = np.random.default_rng(0).uniform(-1, 2, (500, 2))\n"
        "print(repr(float(np.sum(F(X) ** 2))), repr(float(np.sum(F(X, (1, 1))))))\n"
    )
    res = []
    for flag in ("0", "1"):
        env = dict(os.environ, MIXEXT_DISABLE_NUMBA=flag)
        res.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout)
    a = [float(v) for v in res[0].split()]
    b = [float(v) for v in res[1].split()]
    assert np.allclose(a, b, rtol=1e-12, atol=0)
