"""BGA convolution quadrature: weights, forward application, start-up
correction, and the marching solver for convolution equations.

Convention for samples: a function ``g`` on a :class:`~bgacq.scheme.Grid`
is stored as ``g(0)`` plus an ``(N, m)`` array whose row ``n`` holds
``g(t_1^n), ..., g(t_m^n)``.  The plain quadrature ``U_n = sum_j W_j
G_{n-j}`` never reads ``g(0)``; it is first-class only for data vanishing
to high order at the origin.  :func:`corrected_apply` handles the general
case.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import _accel
from .errors import AssumptionViolation, ConditioningError, SingularityError, UnsupportedKernelError
from .scheme import BlockTableau, Grid, assemble_tableau, SchemeParams
from .stability import cached_certification
from .symbol import kernel_on_contour

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-16


def contour_parameters(N: int, tol: float = DEFAULT_TOL, contour_points=None):
    """Radius ``tol**(1/(6N))`` and point count ``5N`` of the weight contour."""
    rho = tol ** (1.0 / (6 * N))
    L = 5 * N if contour_points is None else int(contour_points)
    if L < N + 1:
        raise ValueError(f"need at least N+1={N + 1} contour points, got {L}")
    return rho, L


def _contour_coefficients(F, rho, N, real):
    """Taylor coefficients 0..N from samples on ``|zeta| = rho`` (axis 0)."""
    L = F.shape[0]
    C = np.fft.fft(F, axis=0)[: N + 1] / L
    scale = rho ** -np.arange(N + 1, dtype=float)
    C = C * scale.reshape((-1,) + (1,) * (F.ndim - 1))
    leak = float(np.max(np.abs(C.imag))) if C.size else 0.0
    if real:
        big = float(np.max(np.abs(C))) if C.size else 0.0
        if leak > 1e-8 * max(big, 1e-300):
            warnings.warn(f"imaginary residue {leak:.3e} in weights of a real kernel",
                          RuntimeWarning, stacklevel=3)
        C = C.real.copy()
    return C, leak


def _sample_contour(evaluate, rho, L, real):
    """Evaluate on ``rho exp(2 pi i l / L)``; conjugate symmetry halves the
    work for real kernels."""
    ang = 2 * np.pi * np.arange(L) / L
    zetas = rho * np.exp(1j * ang)
    if not real:
        return evaluate(zetas)
    half = L // 2 + 1
    F_half, extra = evaluate(zetas[:half])
    F = np.empty((L,) + F_half.shape[1:], dtype=complex)
    F[:half] = F_half
    idx = np.arange(half, L)
    F[idx] = F_half[L - idx].conj()
    if extra is not None:
        extra_full = np.empty(L)
        extra_full[:half] = extra
        extra_full[idx] = extra[L - idx]
        extra = extra_full
    return F, extra


@dataclass
class WeightTable:
    """Quadrature weights ``W_0 .. W_N`` (each ``m x m``)."""

    tab: BlockTableau
    kernel_name: str
    h: float
    N: int
    weights: np.ndarray
    contour_rho: float
    contour_points: int
    max_imag_leak: float
    tol: float = DEFAULT_TOL
    eig_condition: np.ndarray = field(default=None, repr=False)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def m(self) -> int:
        return self.tab.m

    def grid(self) -> Grid:
        return Grid(self.h * self.N, self.N, self.m)

    def save(self, path):
        """Text dump: ``#`` header then one line per ``W_j`` holding the
        row-major entries as interleaved ``re,im`` pairs."""
        p = self.tab.params
        with open(path, "w") as f:
            f.write(f"# k1={p.k1},k2={p.k2},m={p.m},h={self.h!r},N={self.N},"
                    f"kernel={self.kernel_name},rho={self.contour_rho!r},"
                    f"L_contour={self.contour_points},tol={self.tol!r}\n")
            for W in self.weights:
                z = np.asarray(W, dtype=complex).ravel()
                pairs = np.column_stack([z.real, z.imag]).ravel()
                f.write(",".join(f"{x:.17e}" for x in pairs) + "\n")

    def eig_condition_csv(self, path):
        with open(path, "w") as f:
            f.write("l,eig_condition\n")
            for i, c in enumerate(self.eig_condition):
                f.write(f"{i},{c:.17g}\n")


def load_weights(path) -> WeightTable:
    with open(path) as f:
        header = f.readline().lstrip("#").strip()
        body = [line for line in f if line.strip()]
    meta = dict(item.split("=", 1) for item in _split_header(header))
    params = SchemeParams(int(meta["k1"]), int(meta["k2"]), int(meta["m"]))
    m = params.m
    rows = np.array([[float(x) for x in line.split(",")] for line in body])
    W = (rows[:, 0::2] + 1j * rows[:, 1::2]).reshape(-1, m, m)
    leak = float(np.max(np.abs(W.imag)))
    if leak == 0.0:
        W = W.real.copy()
    return WeightTable(assemble_tableau(params), meta["kernel"], float(meta["h"]),
                       int(meta["N"]), W, float(meta["rho"]), int(meta["L_contour"]),
                       leak, float(meta.get("tol", DEFAULT_TOL)))


def _split_header(header):
    # kernel labels contain commas inside ":a=1,b=2"; split on known keys
    keys = ("k1", "k2", "m", "h", "N", "kernel", "rho", "L_contour", "tol")
    out, cur = [], ""
    for piece in header.split(","):
        if piece.split("=", 1)[0] in keys and cur:
            out.append(cur)
            cur = piece
        else:
            cur = f"{cur},{piece}" if cur else piece
    out.append(cur)
    return out


def compute_weights(tab: BlockTableau, kernel, h: float, N: int, tol: float = DEFAULT_TOL,
                    contour_points=None, certify=True) -> WeightTable:
    """Weights of ``K(Delta(zeta)/h) = sum_n W_n zeta^n`` by the trapezoidal
    rule on ``|zeta| = rho`` and one FFT per matrix entry.

    ``certify=False`` skips the stability check; only meant for studying
    uncertified schemes.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    if N < 1:
        raise ValueError("N must be >= 1")
    if certify:
        rep = cached_certification(tab)
        if not rep.assumption_satisfied:
            raise AssumptionViolation(
                f"{tab.params.label} fails the stability assumption: "
                + "; ".join(rep.failed), report=rep)
    rho, L = contour_parameters(N, tol, contour_points)
    F, cond = _sample_contour(lambda z: kernel_on_contour(tab, kernel, h, z), rho, L,
                              kernel.real)
    W, leak = _contour_coefficients(F, rho, N, kernel.real)
    return WeightTable(tab, kernel.label, h, N, W, rho, L, leak, tol, cond)


@dataclass(frozen=True)
class SampleVector:
    g0: float
    blocks: np.ndarray

    @property
    def N(self) -> int:
        return self.blocks.shape[0]

    @property
    def m(self) -> int:
        return self.blocks.shape[1]

    def head(self, width: int) -> np.ndarray:
        """``(g(t_0^0), ..., g(t_{width-1}^0))``."""
        return np.concatenate([[self.g0], self.blocks[0, : width - 1]])


def sample(g, grid: Grid) -> SampleVector:
    """Sample a vectorized callable on the fine nodes of ``grid``."""
    vals = np.asarray(g(grid.all_fine_nodes))
    if vals.shape != grid.all_fine_nodes.shape:
        vals = np.broadcast_to(vals, grid.all_fine_nodes.shape)
    return SampleVector(vals[0], vals[1:].reshape(grid.N, grid.m).copy())


def _check_grid(wt: WeightTable, samples: SampleVector):
    if samples.m != wt.m:
        raise ValueError(f"samples have block size {samples.m}, weights {wt.m}")
    if samples.N > wt.N:
        raise ValueError(f"{samples.N} sample blocks but only {wt.N} weights were computed")


def forward_apply(wt: WeightTable, samples: SampleVector, method="direct",
                  use_numba=None) -> np.ndarray:
    """``U_n = sum_{j=0}^n W_j G_{n-j}``; returns an ``(N, m)`` array."""
    _check_grid(wt, samples)
    G = samples.blocks
    if method == "direct":
        return _accel.block_convolve(wt.weights, G, use_numba)
    if method == "fft":
        return _fft_convolve(wt.weights[: G.shape[0]], G)
    raise ValueError(f"unknown method {method!r}")


def _fft_convolve(W, G):
    from scipy.signal import fftconvolve

    N = G.shape[0]
    # sum over c of conv(W[:, r, c], G[:, c])
    full = fftconvolve(W, G[:, None, :], axes=0)[:N]
    return full.sum(axis=2)


@dataclass(frozen=True)
class CorrectionSet:
    n: int
    i: int
    weights: np.ndarray


def _correction_table(wt: WeightTable, kernel, grid: Grid):
    key = ("corr", kernel.label, grid)
    if key in wt._cache:
        return wt._cache[key]
    if kernel.monomial_convolution is None:
        raise UnsupportedKernelError(
            f"kernel {kernel.label!r} has no exact monomial convolutions; supply "
            "monomial_convolution or use forward_apply with data vanishing at t=0")
    if grid.m != wt.m or grid.N > wt.N or not np.isclose(grid.h, wt.h, rtol=1e-14):
        raise ValueError("grid does not match the weight table")
    width = wt.tab.params.width
    delta = grid.h / grid.m
    # basis (t/delta)^l: V becomes the integer Vandermonde matrix
    nodes = np.arange(width, dtype=float)
    V = np.vander(nodes, width, increasing=True).T
    cond = np.linalg.cond(V)
    if cond > 1e12:
        raise ConditioningError(f"correction matrix condition {cond:.3e}", condition=cond)
    lu = scipy.linalg.lu_factor(V)

    t = grid.block_nodes
    k_index = np.arange(1, grid.N * grid.m + 1, dtype=float).reshape(grid.N, grid.m)
    rhs = np.empty((width, grid.N, grid.m))
    for l in range(width):
        exact = np.asarray(kernel.monomial_convolution(l, t), dtype=float) / delta ** l
        cq = _accel.block_convolve(wt.weights, k_index ** l)
        rhs[l] = exact - np.real(cq)
    w = scipy.linalg.lu_solve(lu, rhs.reshape(width, -1))
    table = np.moveaxis(w.reshape(width, grid.N, grid.m), 0, -1)
    wt._cache[key] = (table, cond)
    return table, cond


def correction_weights(wt: WeightTable, kernel, grid: Grid, n: int, i: int) -> CorrectionSet:
    """Start-up weights for fine node ``t_i^n`` (``i`` is 1-based, 1..m).

    They make the corrected quadrature exact at ``t_i^n`` for every
    polynomial of degree ``<= k1+k2+1``, acting on ``g(t_0^0) ..
    g(t_{k1+k2+1}^0)``.
    """
    if not 1 <= i <= grid.m:
        raise ValueError(f"i must be in 1..{grid.m}")
    if not 0 <= n < grid.N:
        raise ValueError(f"n must be in 0..{grid.N - 1}")
    table, _ = _correction_table(wt, kernel, grid)
    return CorrectionSet(n, i, table[n, i - 1].copy())


def corrected_apply(wt: WeightTable, kernel, grid: Grid, samples: SampleVector) -> np.ndarray:
    U = forward_apply(wt, samples)
    table, _ = _correction_table(wt, kernel, grid)
    head = samples.head(wt.tab.params.width)
    return U + table @ head


def solve_convolution_equation(wt: WeightTable, rhs: SampleVector, use_numba=None,
                               max_condition=1e12) -> np.ndarray:
    """March ``W_0 U_n = G_n - sum_{j=1}^n W_j U_{n-j}`` for ``n = 0..N-1``."""
    _check_grid(wt, rhs)
    W0 = wt.weights[0]
    cond = np.linalg.cond(W0)
    if not cond <= max_condition:
        raise ConditioningError(f"W_0 has condition number {cond:.3e}", condition=cond)
    return _accel.block_march(wt.weights, np.linalg.inv(W0), rhs.blocks, use_numba)


def bga_ode_step_sweep(tab: BlockTableau, lam: complex, g, grid: Grid, y0=0.0) -> np.ndarray:
    """Apply the BGA block step to ``y' = lam y + g``, ``y(0) = y0``.

    ``g`` is a vectorized callable or ``None`` for the homogeneous problem.
    Returns ``(N, m)`` fine-node values.
    """
    if grid.m != tab.m:
        raise ValueError("grid and tableau block sizes differ")
    h = grid.h
    M = tab.L - h * lam * tab.A
    if np.linalg.cond(M) > 1e14:
        raise SingularityError(f"L - h lam A is singular for h*lam={h * lam}", z=h * lam)
    dtype = complex if np.iscomplexobj(lam) or np.iscomplexobj(y0) else float
    lu = scipy.linalg.lu_factor(M.astype(dtype))
    if g is None:
        G = np.zeros((grid.N, grid.m))
        g_prev = 0.0
    else:
        s = sample(g, grid)
        G, g_prev = s.blocks, s.g0
    Y = np.empty((grid.N, grid.m), dtype=dtype)
    y_prev = y0
    c_y = h * lam * tab.a - tab.l
    AG = h * (G @ tab.A.T)
    for n in range(grid.N):
        rhs = c_y * y_prev + h * g_prev * tab.a + AG[n]
        Y[n] = scipy.linalg.lu_solve(lu, rhs)
        y_prev, g_prev = Y[n, -1], G[n, -1]
    return Y


LMCQ_SYMBOLS = {
    "BDF2": lambda z: 1.5 - 2.0 * z + 0.5 * z * z,
    "TR": lambda z: 2.0 * (1.0 - z) / (1.0 + z),
}


def baseline_lmcq_weights(method: str, kernel, h: float, N: int, tol: float = DEFAULT_TOL,
                          contour_points=None) -> np.ndarray:
    """Scalar weights of ``K(delta(zeta)/h) = sum_j w_j zeta^j`` for the
    BDF2 or trapezoidal generating function; ``w_0 .. w_N``."""
    try:
        delta = LMCQ_SYMBOLS[method.upper()]
    except KeyError:
        raise ValueError(f"unknown multistep method {method!r}") from None
    rho, L = contour_parameters(N, tol, contour_points)

    def evaluate(zetas):
        lam = delta(zetas) / h
        kernel.check_domain(lam)
        return kernel(lam), None

    F, _ = _sample_contour(evaluate, rho, L, kernel.real)
    w, _ = _contour_coefficients(F, rho, N, kernel.real)
    return w


def lmcq_apply(w, g_values) -> np.ndarray:
    """``u_n = sum_{j<=n} w_j g_{n-j}`` on the grid ``t_n = n h``, n = 0..N."""
    g = np.asarray(g_values)
    out = _accel.block_convolve(np.asarray(w)[:, None, None], g[:, None])
    return out[:, 0]


def lmcq_solve(w, g_values) -> np.ndarray:
    g = np.asarray(g_values)
    w = np.asarray(w)
    return _accel.block_march(w[:, None, None], np.array([[1.0 / w[0]]]), g[:, None])[:, 0]
