import os
import subprocess
import sys

import numpy as np
import pytest

from bgacq import _accel

needs_numba = pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba unavailable")


def _random_problem(seed, N=40, m=4, complex_=False):
    rng = np.random.default_rng(seed)
    W = rng.standard_normal((N + 1, m, m)) / (1 + np.arange(N + 1))[:, None, None]
    W[0] += 3 * np.eye(m)
    G = rng.standard_normal((N, m))
    if complex_:
        W = W + 1j * rng.standard_normal(W.shape) * 0.1
    return W, G


@pytest.mark.parametrize("complex_", [False, True])
def test_numpy_convolve_matches_loop(complex_):
    W, G = _random_problem(0, N=10, complex_=complex_)
    ref = np.array([sum(W[j] @ G[n - j] for j in range(n + 1)) for n in range(10)])
    assert np.allclose(_accel.block_convolve(W, G, use_numba=False), ref, atol=1e-13)


def test_numpy_march_inverts_convolve():
    W, G = _random_problem(1)
    U = _accel.block_convolve(W, G, use_numba=False)
    back = _accel.block_march(W, np.linalg.inv(W[0]), U, use_numba=False)
    assert np.allclose(back, G, atol=1e-10)


@needs_numba
@pytest.mark.parametrize("complex_", [False, True])
def test_numba_matches_numpy(complex_):
    W, G = _random_problem(2, complex_=complex_)
    a = _accel.block_convolve(W, G, use_numba=True)
    b = _accel.block_convolve(W, G, use_numba=False)
    assert a.dtype == b.dtype
    assert np.allclose(a, b, rtol=1e-13, atol=1e-13)
    W0inv = np.linalg.inv(W[0])
    a = _accel.block_march(W, W0inv, G, use_numba=True)
    b = _accel.block_march(W, W0inv, G, use_numba=False)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


def test_env_flag_disables_numba():
    env = dict(os.environ, BGACQ_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "from bgacq import _accel; print(_accel.HAVE_NUMBA)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"
