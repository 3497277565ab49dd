"""Hot loops of the block convolution, with numba and pure-numpy versions.

Set ``BGACQ_DISABLE_NUMBA=1`` to force the numpy path.  If numba is not
importable the numpy path is used silently.
"""
import os

import numpy as np

_disabled = os.environ.get("BGACQ_DISABLE_NUMBA", "").lower() in ("1", "true", "yes")

try:
    if _disabled:
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def block_convolve_numpy(W, G):
    """``U[n] = sum_{j<=n} W[j] @ G[n-j]`` for ``n < len(G)``.

    W has shape ``(>=N, m, m)``, G shape ``(N, m)``.
    """
    N = G.shape[0]
    dtype = np.result_type(W, G)
    U = np.zeros(G.shape, dtype=dtype)
    for n in range(N):
        # W[0..n] against G[n..0]
        U[n] = np.einsum("jrc,jc->r", W[: n + 1], G[n::-1])
    return U


def block_march_numpy(W, W0inv, G):
    """Solve ``sum_{j<=n} W[j] U[n-j] = G[n]`` block by block."""
    N = G.shape[0]
    dtype = np.result_type(W, W0inv, G)
    U = np.zeros(G.shape, dtype=dtype)
    for n in range(N):
        r = G[n] - np.einsum("jrc,jc->r", W[1: n + 1], U[n - 1::-1][:n]) if n else G[0]
        U[n] = W0inv @ r
    return U


if HAVE_NUMBA:

    @njit(cache=True)
    def block_convolve_jit(W, G):
        N, m = G.shape
        U = np.zeros_like(G)
        for n in range(N):
            for j in range(n + 1):
                g = G[n - j]
                for r in range(m):
                    acc = U[n, r]
                    for c in range(m):
                        acc += W[j, r, c] * g[c]
                    U[n, r] = acc
        return U

    @njit(cache=True)
    def block_march_jit(W, W0inv, G):
        N, m = G.shape
        U = np.zeros_like(G)
        r = np.empty_like(G[0])
        for n in range(N):
            for i in range(m):
                r[i] = G[n, i]
            for j in range(1, n + 1):
                u = U[n - j]
                for i in range(m):
                    acc = 0.0 * r[i]
                    for c in range(m):
                        acc += W[j, i, c] * u[c]
                    r[i] -= acc
            for i in range(m):
                acc = 0.0 * r[i]
                for c in range(m):
                    acc += W0inv[i, c] * r[c]
                U[n, i] = acc
        return U


def _common(*arrs):
    dt = np.result_type(*arrs)
    return [np.ascontiguousarray(a, dtype=dt) for a in arrs]


def block_convolve(W, G, use_numba=None):
    if use_numba is None:
        use_numba = HAVE_NUMBA
    W, G = _common(W[: len(G)], G)
    if use_numba and HAVE_NUMBA:
        return block_convolve_jit(W, G)
    return block_convolve_numpy(W, G)


def block_march(W, W0inv, G, use_numba=None):
    if use_numba is None:
        use_numba = HAVE_NUMBA
    W, W0inv, G = _common(W[: len(G)], W0inv, G)
    if use_numba and HAVE_NUMBA:
        return block_march_jit(W, W0inv, G)
    return block_march_numpy(W, W0inv, G)
