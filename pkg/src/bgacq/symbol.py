"""Discretized differential symbol and kernel matrix functions.

``Delta(zeta) = (A + zeta a e_m^T)^{-1} (L + zeta l e_m^T)`` is the
matrix-valued generating function of a BGA scheme; the quadrature weights
are the Taylor coefficients of ``K(Delta(zeta)/h)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import KernelDomainError, NearDefectiveError, SingularityError
from .scheme import BlockTableau

RECONSTRUCTION_TOL = 1e-8


@dataclass(frozen=True)
class SymbolEvaluation:
    """Eigendecomposition ``delta = P diag(d) P^{-1}``.

    ``eig_condition`` is the spectral condition number of ``P``;
    ``eigval_conditions`` holds the individual eigenvalue condition numbers
    ``1/|y_i^H x_i|`` for unit left/right eigenvectors.
    """

    zeta: complex
    delta: np.ndarray
    eigvecs: np.ndarray
    eigvals: np.ndarray
    eig_condition: float
    eigval_conditions: np.ndarray
    residual: float


def delta_symbol(tab: BlockTableau, zeta: complex) -> np.ndarray:
    """Dense evaluation of ``Delta(zeta)`` for ``|zeta| < 1``."""
    if not abs(zeta) < 1:
        raise ValueError(f"|zeta| must be < 1, got {abs(zeta)}")
    e = np.zeros(tab.m)
    e[-1] = 1.0
    lhs = tab.A + zeta * np.outer(tab.a, e)
    rhs = tab.L + zeta * np.outer(tab.l, e)
    if np.linalg.cond(lhs) > 1e14:
        raise SingularityError(f"A + zeta a e_m^T is singular at zeta={zeta}", z=zeta)
    return np.linalg.solve(lhs.astype(complex), rhs.astype(complex))


def delta_symbols(tab: BlockTableau, zetas) -> np.ndarray:
    """Stacked dense evaluation, shape ``(len(zetas), m, m)``."""
    zetas = np.asarray(zetas, dtype=complex)
    if np.any(np.abs(zetas) >= 1):
        raise ValueError("all contour points must satisfy |zeta| < 1")
    m = tab.m
    lhs = np.broadcast_to(tab.A, (zetas.size, m, m)).astype(complex)
    rhs = np.broadcast_to(tab.L, (zetas.size, m, m)).astype(complex)
    lhs[:, :, -1] += zetas[:, None] * tab.a[None, :]
    rhs[:, :, -1] += zetas[:, None] * tab.l[None, :]
    return np.linalg.solve(lhs, rhs)


def delta_symbol_rank1(tab: BlockTableau, zeta: complex) -> np.ndarray:
    """Sherman-Morrison route to ``Delta(zeta)``, reusing ``A^{-1}``.

    ``(A + zeta a e^T)^{-1} = A^{-1} - zeta A^{-1} a e^T A^{-1} / (1 + zeta c)``
    with ``c = e^T A^{-1} a``; ``|c| = |R_m(inf)| < 1`` keeps the
    denominator away from zero for ``|zeta| < 1``.
    """
    if not abs(zeta) < 1:
        raise ValueError(f"|zeta| must be < 1, got {abs(zeta)}")
    Ainv_a = np.linalg.solve(tab.A, tab.a)
    G = tab.generator
    Ainv_l = np.linalg.solve(tab.A, tab.l)
    c = Ainv_a[-1]
    # X = A^{-1}(L + zeta l e^T)
    X = G.astype(complex)
    X[:, -1] += zeta * Ainv_l
    return X - zeta * np.outer(Ainv_a, X[-1]) / (1 + zeta * c)


def eig_symbol(delta, zeta=np.nan) -> SymbolEvaluation:
    delta = np.asarray(delta, dtype=complex)
    d, yl, P = scipy.linalg.eig(delta, left=True, right=True)
    # unit-norm columns from LAPACK; condition of each eigenvalue
    s = np.abs(np.einsum("ij,ij->j", yl.conj(), P))
    with np.errstate(divide="ignore"):
        kappa = 1.0 / s
    recon = P @ np.diag(d) @ np.linalg.inv(P)
    nrm = np.linalg.norm(delta)
    res = np.linalg.norm(recon - delta) / max(nrm, np.finfo(float).tiny)
    if not res <= RECONSTRUCTION_TOL:
        raise NearDefectiveError(
            f"eigendecomposition residual {res:.3e} exceeds "
            f"{RECONSTRUCTION_TOL:g}; matrix is near-defective",
            residual=res,
        )
    return SymbolEvaluation(zeta, delta, P, d, float(np.linalg.cond(P)), kappa, float(res))


def _check_spectrum(kernel, lam):
    try:
        kernel.check_domain(lam)
    except KernelDomainError as exc:
        raise KernelDomainError(
            f"eigenvalue d/h = {exc.point:.6g} lies outside the analyticity "
            f"region Re >= {kernel.sigma:g} of kernel {kernel.label!r}",
            point=exc.point, index=exc.index,
        ) from None


def kernel_matrix_function(kernel, ev: SymbolEvaluation, h: float) -> np.ndarray:
    """``K(Delta/h) = P diag(K(d_i/h)) P^{-1}``."""
    if not h > 0:
        raise ValueError("h must be positive")
    lam = ev.eigvals / h
    _check_spectrum(kernel, lam)
    X = ev.eigvecs * kernel(lam)[None, :]
    # X P^{-1} without forming the inverse
    return np.linalg.solve(ev.eigvecs.T, X.T).T


def _clusters(ev, tol):
    """Group eigenvalues closer than ``tol`` (single linkage)."""
    groups = []
    for i in np.argsort(ev.real):
        hit = [g for g in groups if np.min(np.abs(ev[g] - ev[i])) < tol]
        merged = [i] + [j for g in hit for j in g]
        groups = [g for g in groups if g not in hit] + [merged]
    return [np.array(sorted(g)) for g in groups]


def kernel_matrix_function_contour(kernel, delta, h: float, n_points: int = 64) -> np.ndarray:
    """``K(delta/h)`` by trapezoidal Cauchy integrals on circles around
    eigenvalue clusters.

    Used when ``delta`` is near-defective: the Parlett recurrence divides by
    eigenvalue gaps and breaks down there, the resolvent integral does not.
    Each circle must stay right of ``kernel.sigma`` and away from the other
    clusters, otherwise :class:`NearDefectiveError` is raised.
    """
    M = np.asarray(delta, dtype=complex) / h
    m = M.shape[0]
    ev = np.linalg.eigvals(M)
    _check_spectrum(kernel, ev)
    scale = max(1.0, float(np.max(np.abs(ev))))
    groups = _clusters(ev, 1e-2 * scale)
    theta = 2 * np.pi * (np.arange(n_points) + 0.5) / n_points
    F = np.zeros((m, m), dtype=complex)
    I = np.eye(m)
    for g in groups:
        c = ev[g].mean()
        spread = float(np.max(np.abs(ev[g] - c)))
        others = np.delete(ev, g)
        gap = float(np.min(np.abs(others - c))) if others.size else np.inf
        room = c.real - kernel.sigma if np.isfinite(kernel.sigma) else np.inf
        r = min(0.5 * gap, 0.9 * room, 0.5 * abs(c) if abs(c) > 0 else 1.0)
        if not r > 2 * spread:
            raise NearDefectiveError(
                f"no admissible contour around eigenvalue cluster at {c:.6g}", residual=np.nan)
        for w in c + r * np.exp(1j * theta):
            # (1/2 pi i) K(w) (wI - M)^{-1} dw with dw = i (w - c) dtheta
            F += kernel(w) * (w - c) * np.linalg.solve(w * I - M, I)
    return F / n_points


kernel_matrix_function_schur = kernel_matrix_function_contour


def evaluate_kernel_matrix(kernel, delta, h: float, zeta=np.nan):
    """Diagonalization with a contour-integral fallback.

    Returns ``(K(delta/h), eig_condition)``; the condition is ``nan`` when
    the fallback was taken.
    """
    try:
        ev = eig_symbol(delta, zeta)
    except NearDefectiveError:
        return kernel_matrix_function_contour(kernel, delta, h), np.nan
    return kernel_matrix_function(kernel, ev, h), ev.eig_condition


def kernel_on_contour(tab: BlockTableau, kernel, h: float, zetas):
    """Evaluate ``K(Delta(zeta)/h)`` at every ``zeta``.

    Batched eigendecomposition; points whose reconstruction check fails are
    redone one at a time through the contour fallback.  Returns the stack of
    matrices (shape ``(len(zetas), m, m)``) and per-point ``cond(P)``.
    """
    zetas = np.asarray(zetas, dtype=complex)
    D = delta_symbols(tab, zetas)
    d, P = np.linalg.eig(D)
    lam = d / h
    try:
        _check_spectrum(kernel, lam.ravel())
    except KernelDomainError as exc:
        k = exc.index // tab.m
        raise KernelDomainError(
            f"contour point {k} (zeta={zetas[k]:.6g}): {exc}", point=exc.point, index=k
        ) from None
    Kd = kernel(lam)
    X = P * Kd[:, None, :]
    PT = np.swapaxes(P, 1, 2)
    F = np.swapaxes(np.linalg.solve(PT, np.swapaxes(X, 1, 2)), 1, 2)

    recon = np.swapaxes(np.linalg.solve(PT, np.swapaxes(P * d[:, None, :], 1, 2)), 1, 2)
    nrm = np.linalg.norm(D, axis=(1, 2))
    res = np.linalg.norm(recon - D, axis=(1, 2)) / nrm
    cond = np.linalg.cond(P)
    for k in np.flatnonzero(~(res <= RECONSTRUCTION_TOL)):
        F[k] = kernel_matrix_function_contour(kernel, D[k], h)
        cond[k] = np.nan
    return F, cond


def resolvent_series(tab: BlockTableau, z: complex, zeta: complex, tol=1e-10,
                     max_terms=10_000) -> tuple[np.ndarray, int]:
    """``(Delta(zeta) - z I)^{-1}`` as a power series in ``zeta``.

    With ``M = (L - zA)^{-1}``, ``B = M (z a - l) e_m^T`` and ``R = R_m(z)``,
    ``B^k = R^{k-1} B`` and the Neumann series gives

        M A                                        (zeta^0)
        M a e^T + B M A                            (zeta^1)
        R^{j-1} B M A + R^{j-2} B M a e^T          (zeta^j, j >= 2)

    Terms are summed until their norm falls below ``tol`` times the running
    sum.  Returns the sum and the number of terms used.
    """
    m = tab.m
    e = np.zeros(m)
    e[-1] = 1.0
    Lz = (tab.L - z * tab.A).astype(complex)
    M_A = np.linalg.solve(Lz, tab.A.astype(complex))
    M_a = np.linalg.solve(Lz, tab.a.astype(complex))
    v = np.linalg.solve(Lz, (z * tab.a - tab.l).astype(complex))
    R = v[-1]
    B = np.outer(v, e)
    BMA = B @ M_A
    BMae = B @ np.outer(M_a, e)

    total = M_A + zeta * (np.outer(M_a, e) + BMA)
    zj = zeta
    for j in range(2, max_terms):
        zj = zj * zeta
        term = zj * (R ** (j - 1) * BMA + R ** (j - 2) * BMae)
        total = total + term
        if np.linalg.norm(term) <= tol * np.linalg.norm(total) * 1e-2:
            return total, j + 1
    raise ArithmeticError(f"resolvent series did not converge in {max_terms} terms")
