import numpy as np
import pytest

from ctsmooth import _backend, _kernels_py

ck = pytest.importorskip("ctsmooth._ckernels")

LAMS = [0.0, 0.5, 1.0, 2.0]


def stack(seed, m, r, c, zero_frac=0.0):
    rng = np.random.default_rng(seed)
    P = rng.dirichlet(np.ones(r * c), size=m)
    if zero_frac:
        P[rng.random(P.shape) < zero_frac] = 0.0
        P[P.sum(axis=1) == 0, 0] = 1.0
        P /= P.sum(axis=1, keepdims=True)
    return P.reshape(m, r, c)


def test_backend_selected():
    assert _backend.name in ("cython", "python")


@pytest.mark.parametrize("lam", LAMS)
def test_values_parity(lam):
    for zf in (0.0, 0.3):
        P = stack(1, 200, 4, 5, zf)
        np.testing.assert_allclose(ck.cramer_v_values(P, lam), _kernels_py.cramer_v_values(P, lam), rtol=1e-12, atol=1e-14)
        Q = stack(2, 200, 4, 4, zf)
        np.testing.assert_allclose(ck.symmetry_phi_values(Q, lam), _kernels_py.symmetry_phi_values(Q, lam), rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("lam", LAMS)
@pytest.mark.parametrize("kind, dims", [(0, (3, 4)), (1, (4, 4))])
def test_derivative_parity(kind, dims, lam):
    P = stack(3, 50, *dims)
    for a, b in zip(ck.derivatives_batch(kind, P, lam), _kernels_py.derivatives_batch(kind, P, lam)):
        np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-9)
    for a, b in zip(ck.mse_coefficients_batch(kind, P, lam), _kernels_py.mse_coefficients_batch(kind, P, lam)):
        np.testing.assert_allclose(a, b, rtol=1e-8, atol=1e-8)


@pytest.mark.parametrize("lam", [1.0, 2.0])
def test_zero_cell_derivative_parity(lam):
    P = stack(4, 50, 4, 4, 0.2)
    for kind in (0, 1):
        a = ck.mse_coefficients_batch(kind, P, lam)
        b = _kernels_py.mse_coefficients_batch(kind, P, lam)
        ok = np.isfinite(b[0])
        np.testing.assert_array_equal(np.isfinite(a[0]), ok)
        np.testing.assert_allclose(a[0][ok], b[0][ok], rtol=1e-8, atol=1e-8)
        np.testing.assert_allclose(a[1][ok], b[1][ok], rtol=1e-8, atol=1e-8)


def test_read_only_input():
    P = stack(5, 3, 3, 3)
    P.flags.writeable = False
    ck.cramer_v_values(P, 1.0)
    ck.derivatives_batch(1, P, 1.0)


def test_forced_fallback_gives_same_estimate():
    import json
    import os
    import subprocess
    import sys

    code = (
        "import json, ctsmooth; from ctsmooth import *; import numpy as np;"
        "t = CountTable.from_array(np.array([[30, 5, 12], [7, 22, 9], [4, 8, 25]]));"
        "r = estimate(MeasureSpec.symmetry_phi(1), t, AlphaRule.optimal());"
        "print(json.dumps([ctsmooth.backend, r.alpha_used, r.estimate]))"
    )
    out = {}
    for flag in ("", "1"):
        env = dict(os.environ, CTSMOOTH_PURE_PYTHON=flag)
        proc = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env, check=True)
        out[flag] = json.loads(proc.stdout)
    assert out["1"][0] == "python"
    assert out[""][0] == "cython"
    assert out["1"][1] == pytest.approx(out[""][1], rel=1e-10)
    assert out["1"][2] == pytest.approx(out[""][2], rel=1e-10)
