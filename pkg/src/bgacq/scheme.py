"""Block generalized Adams (BGA) tableau construction.

The weights are computed in exact rational arithmetic: every local Lagrange
cardinal polynomial is expanded into monomial coefficients and integrated
termwise, so the tableau carries no quadrature error.  Floating point copies
are produced once, at the end.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class SchemeParams:
    """Stencil offsets ``(k1, k2)`` and block size ``m``."""

    k1: int
    k2: int
    m: int

    def __post_init__(self):
        for name in ("k1", "k2", "m"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
                raise TypeError(f"{name} must be an integer, got {v!r}")
        if self.k1 < 0 or self.k2 < 0:
            raise ValueError("k1 and k2 must be nonnegative")
        if self.m < self.width:
            raise ValueError(
                f"block size m={self.m} is below the stencil width "
                f"k1+k2+2={self.width}"
            )

    @property
    def width(self) -> int:
        """Number of interpolation nodes, ``k1 + k2 + 2``."""
        return self.k1 + self.k2 + 2

    @property
    def order(self) -> int:
        """Nominal convergence order of the associated quadrature."""
        return self.k1 + self.k2 + 2

    @property
    def label(self) -> str:
        return f"BGA_{self.k1},{self.k2}^{self.m}"


@dataclass(frozen=True)
class Grid:
    """Uniform coarse grid with ``m`` equal fine subintervals per block.

    Fine node ``t_j^n`` is computed from its global integer index
    ``n*m + j`` so that ``t_m^n`` and ``t_0^{n+1}`` are bitwise equal.
    """

    T: float
    N: int
    m: int

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("T must be positive")
        if self.N < 1 or self.m < 1:
            raise ValueError("N and m must be positive")

    @property
    def h(self) -> float:
        return self.T / self.N

    def fine_node(self, n, j):
        k = np.asarray(n) * self.m + np.asarray(j)
        return self.T * k / (self.N * self.m)

    def coarse_node(self, n):
        return self.fine_node(n, 0)

    @property
    def coarse_nodes(self) -> np.ndarray:
        return self.fine_node(np.arange(self.N + 1), 0)

    @property
    def all_fine_nodes(self) -> np.ndarray:
        """All fine nodes ``0 = t_0^0 < ... < t_m^{N-1} = T``."""
        return self.T * np.arange(self.N * self.m + 1) / (self.N * self.m)

    @property
    def block_nodes(self) -> np.ndarray:
        """Array of shape ``(N, m)`` with ``t_1^n .. t_m^n`` in row ``n``."""
        return self.all_fine_nodes[1:].reshape(self.N, self.m)


def _check_index(params: SchemeParams, i: int):
    if not -params.k1 <= i <= params.k2 + 1:
        raise ValueError(
            f"index {i} outside [{-params.k1}, {params.k2 + 1}]"
        )


def fundamental_poly(params: SchemeParams, i: int, v):
    """Lagrange cardinal polynomial on the integer nodes ``-k1 .. k2+1``."""
    _check_index(params, i)
    v = np.asarray(v, dtype=float)
    out = np.ones_like(v)
    for l in range(-params.k1, params.k2 + 2):
        if l != i:
            out = out * (v - l) / (i - l)
    return out[()] if out.ndim == 0 else out


def _cardinal_coeffs(k1: int, k2: int, i: int) -> list[Fraction]:
    # ascending monomial coefficients of phi_i
    coeffs = [Fraction(1)]
    for l in range(-k1, k2 + 2):
        if l == i:
            continue
        d = Fraction(1, i - l)
        nxt = [Fraction(0)] * (len(coeffs) + 1)
        for p, c in enumerate(coeffs):
            nxt[p + 1] += c * d
            nxt[p] -= c * l * d
        coeffs = nxt
    return coeffs


def _integrate(coeffs, lo: int, hi: int) -> Fraction:
    return sum(
        (c * (Fraction(hi) ** (p + 1) - Fraction(lo) ** (p + 1)) / (p + 1)
         for p, c in enumerate(coeffs)),
        Fraction(0),
    )


def _weights_exact(params: SchemeParams, lo: int, hi: int) -> list[Fraction]:
    k1, k2, m = params.k1, params.k2, params.m
    return [
        _integrate(_cardinal_coeffs(k1, k2, i), lo, hi) / m
        for i in range(-k1, k2 + 2)
    ]


def interior_weights_exact(params: SchemeParams) -> list[Fraction]:
    return _weights_exact(params, 0, 1)


def boundary_weights_exact(params: SchemeParams, j: int) -> list[Fraction]:
    k1, k2, m = params.k1, params.k2, params.m
    if 0 <= j < k1:
        lo = j - k1
    elif m - k2 <= j < m:
        lo = j - m + k2 + 1
    else:
        raise ValueError(
            f"row j={j} is an interior row (k1 <= j < m-k2); "
            "use interior_weights"
        )
    return _weights_exact(params, lo, lo + 1)


def interior_weights(params: SchemeParams) -> np.ndarray:
    """``(alpha_{-k1}, ..., alpha_{k2+1})``, integrals of the cardinal
    polynomials over ``[0, 1]`` divided by ``m``."""
    return np.array([float(w) for w in interior_weights_exact(params)])


def boundary_weights(params: SchemeParams, j: int) -> np.ndarray:
    """Edge-row weights for subinterval ``j`` (``j < k1`` or ``j >= m-k2``)."""
    return np.array([float(w) for w in boundary_weights_exact(params, j)])


def row_stencil(params: SchemeParams, j: int) -> tuple[int, list[Fraction]]:
    """First fine-node index and exact weights used by subinterval ``j``.

    Row layout of the m x (m+1) matrix [a | A] (rows and columns 0-based,
    column c multiplies the value at fine node t_c):

        row j            regime      first column   integration range
        0 .. k1-1        left edge   0              [j-k1, j-k1+1]
        k1 .. m-k2-1     interior    j - k1         [0, 1]
        m-k2 .. m-1      right edge  m-k1-k2-1      [j-m+k2+1, j-m+k2+2]
    """
    k1, k2, m = params.k1, params.k2, params.m
    if not 0 <= j < m:
        raise ValueError(f"row {j} outside [0, {m})")
    if j < k1:
        return 0, boundary_weights_exact(params, j)
    if j < m - k2:
        return j - k1, interior_weights_exact(params)
    return m - k1 - k2 - 1, boundary_weights_exact(params, j)


@dataclass(frozen=True)
class BlockTableau:
    """Matrices of one BGA block step, ``[a | A]`` and ``[l | L]``.

    ``exact_full`` keeps the rational m x (m+1) matrix ``[a | A]`` for
    high-precision work (see :func:`bgacq.stability.dissipation_expansion`).
    """

    params: SchemeParams
    a: np.ndarray
    A: np.ndarray
    l: np.ndarray
    L: np.ndarray
    exact_full: tuple = field(repr=False, compare=False)

    @property
    def m(self) -> int:
        return self.params.m

    @property
    def full_A(self) -> np.ndarray:
        return np.column_stack([self.a, self.A])

    @property
    def full_L(self) -> np.ndarray:
        return np.column_stack([self.l, self.L])

    @cached_property
    def generator(self) -> np.ndarray:
        """``A^{-1} L``."""
        return np.linalg.solve(self.A, self.L)

    def to_csv(self, path=None) -> str:
        """Row-major dump of ``[a|A]`` then ``[l|L]`` with 17 significant
        digits.  Returns the text and writes it to ``path`` if given."""
        p = self.params
        lines = [f"# k1={p.k1},k2={p.k2},m={p.m}", "# block=Atilde"]
        for row in self.full_A:
            lines.append(",".join(f"{x:.16e}" for x in row))
        lines.append("# block=Ltilde")
        for row in self.full_L:
            lines.append(",".join(f"{x:.16e}" for x in row))
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as f:
                f.write(text)
        return text


def assemble_tableau(params: SchemeParams) -> BlockTableau:
    m, w = params.m, params.width
    exact = [[Fraction(0)] * (m + 1) for _ in range(m)]
    for j in range(m):
        c0, wts = row_stencil(params, j)
        for c, v in enumerate(wts):
            exact[j][c0 + c] = v
    full = np.array([[float(x) for x in row] for row in exact])
    assert full.shape == (m, m + 1) and w <= m

    full_L = np.zeros((m, m + 1))
    idx = np.arange(m)
    full_L[idx, idx] = -1.0
    full_L[idx, idx + 1] = 1.0

    return BlockTableau(
        params=params,
        a=full[:, 0].copy(),
        A=full[:, 1:].copy(),
        l=full_L[:, 0].copy(),
        L=full_L[:, 1:].copy(),
        exact_full=tuple(tuple(r) for r in exact),
    )


def tableau(k1: int, k2: int, m: int) -> BlockTableau:
    """Shorthand for ``assemble_tableau(SchemeParams(k1, k2, m))``."""
    return assemble_tableau(SchemeParams(k1, k2, m))


def quadrature_rule(params: SchemeParams, f, grid: Grid, n: int, j: int) -> float:
    """Approximate ``int_{t_j^n}^{t_{j+1}^n} f`` with the BGA row rule."""
    c0, wts = row_stencil(params, j)
    nodes = grid.fine_node(n, np.arange(c0, c0 + params.width))
    vals = np.asarray([f(t) for t in nodes], dtype=float)
    return grid.h * float(np.dot([float(x) for x in wts], vals))
