"""Stability function of a BGA block step and certification of A-stability.

``R_m(z) = e_m^T (L - zA)^{-1} (z a - l)`` is the amplification of the
block step for ``y' = lambda y`` with ``z = h lambda``.  A scheme is usable
for hyperbolic kernels when

* ``A`` is invertible and ``A^{-1} L`` has its spectrum in ``Re > 0``,
* ``|R_m(i w)| <= 1`` on the imaginary axis,
* ``|R_m(inf)| = |e_m^T A^{-1} a| < 1``.

All three are checked numerically.
"""
from __future__ import annotations

import json
import logging
import warnings
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import mpmath
import numpy as np
from scipy.optimize import brentq

from .errors import FitError, SingularityError
from .scheme import BlockTableau, SchemeParams, assemble_tableau

log = logging.getLogger(__name__)

IMAG_AXIS_TOL = 1e-10
DEFAULT_OMEGA_SAMPLES = 4096
DEFAULT_OMEGA_MAX = 1e6


def stability_function(tab: BlockTableau, z):
    """``R_m(z)``; ``z`` may be a scalar or an array."""
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    zs = np.atleast_1d(z).ravel()
    M = tab.L[None, :, :] - zs[:, None, None] * tab.A[None, :, :]
    rhs = zs[:, None] * tab.a[None, :] - tab.l[None, :]
    cond = np.linalg.cond(M)
    bad = np.flatnonzero(~(cond < 1e14))
    if bad.size:
        zb = zs[bad[0]]
        raise SingularityError(
            f"L - zA is singular at z={zb:.6g} (z is a generator eigenvalue)", z=zb)
    out = np.linalg.solve(M, rhs[:, :, None])[:, -1, 0]
    return out[0] if scalar else out.reshape(z.shape)


def stability_at_infinity(tab: BlockTableau) -> float:
    if np.linalg.cond(tab.A) > 1e14:
        raise SingularityError("A is singular")
    return float(abs(np.linalg.solve(tab.A, tab.a)[-1]))


def generator_spectrum(tab: BlockTableau) -> np.ndarray:
    """Eigenvalues of ``A^{-1} L`` sorted by (real, imag)."""
    if np.linalg.cond(tab.A) > 1e14:
        raise SingularityError("A is singular")
    ev = np.linalg.eigvals(tab.generator)
    # conjugates of a real matrix can come out with tiny real-part mismatch
    key = np.round(ev, 10)
    return ev[np.lexsort((key.imag, key.real))]


@dataclass
class StabilityReport:
    params: SchemeParams
    generator_spectrum: list
    r_infinity: float
    imaginary_axis_max: float
    assumption_satisfied: bool
    samples_used: int
    A_invertible: bool = True
    spectrum_positive: bool = True
    imaginary_axis_ok: bool = True
    infinity_ok: bool = True
    omega_max: float = DEFAULT_OMEGA_MAX
    omega_at_max: float = float("nan")
    failed: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["params"] = asdict(self.params)
        d["generator_spectrum"] = [[float(z.real), float(z.imag)]
                                   for z in self.generator_spectrum]
        return d

    def to_text(self) -> str:
        """``key = value`` lines; the spectrum is written as JSON."""
        lines = []
        for k, v in self.to_dict().items():
            if isinstance(v, (list, dict)):
                v = json.dumps(v)
            lines.append(f"{k} = {v}")
        return "\n".join(lines) + "\n"


def certify_assumption(tab: BlockTableau, omega_samples=DEFAULT_OMEGA_SAMPLES,
                       omega_max=DEFAULT_OMEGA_MAX) -> StabilityReport:
    """Numerical check of the three stability conditions.

    The imaginary axis is sampled on a log grid in ``[1e-3, omega_max]``
    and its mirror image; ``|R_m| <= 1 + 1e-10`` is required.  Failures are
    recorded in the report, never raised.
    """
    if omega_samples < 2:
        raise ValueError("omega_samples must be >= 2")
    failed = []
    A_ok = np.linalg.cond(tab.A) < 1e14
    if not A_ok:
        failed.append("A singular")
        return StabilityReport(tab.params, [], float("inf"), float("inf"), False, 0,
                               A_invertible=False, spectrum_positive=False,
                               imaginary_axis_ok=False, infinity_ok=False,
                               omega_max=omega_max, failed=failed)
    spec = generator_spectrum(tab)
    spec_ok = bool(spec.real.min() > 0)
    if not spec_ok:
        failed.append(f"generator eigenvalue with Re <= 0: {spec[0]:.4g}")

    w = np.logspace(-3, np.log10(omega_max), omega_samples)
    w = np.concatenate([-w[::-1], w])
    try:
        r = np.abs(stability_function(tab, 1j * w))
    except SingularityError as exc:
        r = np.full(w.shape, np.inf)
        failed.append(f"pole on the imaginary axis near {exc.z}")
    k = int(np.argmax(r))
    imag_max = float(r[k])
    imag_ok = imag_max <= 1 + IMAG_AXIS_TOL
    if not imag_ok:
        failed.append(f"|R(i w)| = {imag_max:.6g} > 1 at w = {w[k]:.6g}")

    rinf = stability_at_infinity(tab)
    inf_ok = rinf < 1
    if not inf_ok:
        failed.append(f"|R(inf)| = {rinf:.6g} >= 1")

    return StabilityReport(
        params=tab.params,
        generator_spectrum=list(spec),
        r_infinity=rinf,
        imaginary_axis_max=imag_max,
        assumption_satisfied=bool(A_ok and spec_ok and imag_ok and inf_ok),
        samples_used=int(w.size),
        A_invertible=bool(A_ok),
        spectrum_positive=spec_ok,
        imaginary_axis_ok=bool(imag_ok),
        infinity_ok=bool(inf_ok),
        omega_max=omega_max,
        omega_at_max=float(w[k]),
        failed=failed,
    )


@lru_cache(maxsize=256)
def _certified(params: SchemeParams) -> StabilityReport:
    return certify_assumption(assemble_tableau(params))


def cached_certification(tab: BlockTableau) -> StabilityReport:
    """Default-parameter certification, memoized on the scheme parameters."""
    return _certified(tab.params)


def min_block_size(k1: int, k2: int, m_max: int = 20, **certify_kw):
    """Smallest ``m`` in ``[k1+k2+2, m_max]`` passing certification, or
    ``None`` when there is none."""
    m0 = k1 + k2 + 2
    if m_max < m0:
        raise ValueError(f"m_max must be >= {m0}")
    for m in range(m0, m_max + 1):
        rep = certify_assumption(assemble_tableau(SchemeParams(k1, k2, m)), **certify_kw)
        if rep.assumption_satisfied:
            return m
    return None


def stability_boundary(tab: BlockTableau, theta_samples=256, r_min=1e-4, r_max=1e4,
                       radial_samples=400):
    """Trace the outer locus ``|R_m(z)| = 1`` in the right half-plane.

    For every ray ``z = r exp(i theta)`` with ``|theta| < pi/2`` the outermost
    sign change of ``|R_m| - 1`` on a log grid of radii is bracketed and
    refined with Brent's method.  ``z = 0`` is prepended.  Returns
    ``(points, n_failed)``; rays without a bracket are omitted and counted.
    """
    if theta_samples < 16:
        raise ValueError("theta_samples must be >= 16")
    thetas = np.linspace(-np.pi / 2, np.pi / 2, theta_samples + 2)[1:-1]
    radii = np.logspace(np.log10(r_min), np.log10(r_max), radial_samples)
    spec = generator_spectrum(tab)
    pts, n_failed = [0j], 0

    def f(r, th):
        return abs(stability_function(tab, r * np.exp(1j * th))) - 1.0

    for th in thetas:
        zs = radii * np.exp(1j * th)
        # keep the sampling grid off the poles
        near = np.min(np.abs(zs[:, None] - spec[None, :]), axis=1) < 1e-9
        zs = np.where(near, zs * (1 + 1e-6), zs)
        vals = np.abs(stability_function(tab, zs)) - 1.0
        idx = np.flatnonzero((vals[:-1] > 0) & (vals[1:] <= 0))
        if idx.size == 0:
            n_failed += 1
            continue
        i = idx[-1]
        try:
            r = brentq(f, radii[i], radii[i + 1], args=(th,), xtol=1e-14, rtol=1e-12)
        except (ValueError, RuntimeError):
            n_failed += 1
            continue
        pts.append(r * np.exp(1j * th))
    if n_failed:
        warnings.warn(f"{n_failed} of {thetas.size} rays had no boundary crossing",
                      RuntimeWarning, stacklevel=2)
    return np.array(pts), n_failed


def write_points_csv(points, path):
    """Write complex points as ``re,im`` rows."""
    with open(path, "w") as f:
        f.write("re,im\n")
        for z in points:
            f.write(f"{z.real:.17g},{z.imag:.17g}\n")


@dataclass(frozen=True)
class DissipationExpansion:
    """``lambda_hat - i w ~ c_real w (wh)^p + i c_imag w (wh)^q``."""

    params: SchemeParams
    order_real: int
    coeff_real: float
    order_imag: int
    coeff_imag: float


def _exact_R(tab: BlockTableau, dps: int):
    """Closure evaluating ``R_m`` in ``dps``-digit arithmetic from the
    rational tableau."""
    m = tab.m
    with mpmath.workdps(dps):
        full = [[mpmath.mpf(x.numerator) / x.denominator for x in row]
                for row in tab.exact_full]
        a = mpmath.matrix([row[0] for row in full])
        A = mpmath.matrix([row[1:] for row in full])
        L = mpmath.matrix(m, m)
        for i in range(m):
            L[i, i] = 1
            if i:
                L[i, i - 1] = -1
        l = mpmath.matrix(m, 1)
        l[0] = -1

    def R(z):
        with mpmath.workdps(dps):
            x = mpmath.lu_solve(L - z * A, z * a - l)
            return x[m - 1]

    return R


def solve_modified_frequency(tab: BlockTableau, omega_h: float, dps=60):
    """Root ``zhat`` of ``R_m(zhat) = exp(i omega_h)`` near ``i omega_h``."""
    R = _exact_R(tab, dps)
    with mpmath.workdps(dps):
        target = mpmath.expj(mpmath.mpf(omega_h))
        z0 = mpmath.mpc(0, omega_h)
        return mpmath.findroot(lambda z: R(z) - target, z0, tol=mpmath.mpf(10) ** (-dps + 10))


def dissipation_expansion(tab: BlockTableau, h_samples=None, dps=60,
                          max_slope_error=0.15) -> DissipationExpansion:
    """Leading real and imaginary terms of ``lambda_hat - lambda`` for
    ``lambda = i`` (``omega = 1``).

    ``R_m(lambda_hat h) = exp(i h)`` is solved in extended precision for each
    sample ``h``; the orders come from log-log slopes and the coefficients
    from a linear extrapolation of ``residual / h^p`` to ``h = 0``.
    """
    if h_samples is None:
        h_samples = np.logspace(-3, -1.5, 8)
    h = np.asarray(h_samples, dtype=float)
    if np.any(np.abs(h) > 0.1):
        raise ValueError("sample products omega*h must satisfy |omega h| <= 0.1")
    res = []
    for hv in h:
        zhat = solve_modified_frequency(tab, hv, dps)
        with mpmath.workdps(dps):
            d = (zhat - mpmath.mpc(0, hv)) / hv
        res.append(complex(d))
    res = np.array(res)

    def fit(part):
        y = np.abs(part)
        if np.any(y == 0):
            raise FitError("residual vanished identically; no leading term")
        slope = np.polyfit(np.log(h), np.log(y), 1)[0]
        p = int(round(slope))
        if abs(slope - p) > max_slope_error:
            raise FitError(f"log-log slope {slope:.3f} is not close to an integer")
        c = np.polyfit(h, part / h ** p, 1)[1]
        return p, float(c)

    p, cp = fit(res.real)
    q, cq = fit(res.imag)
    return DissipationExpansion(tab.params, p, cp, q, cq)
