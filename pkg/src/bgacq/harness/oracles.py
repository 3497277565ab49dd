"""Brute-force references that do not go through the Laplace transform."""
from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate

from ..errors import OracleError


def oracle_direct_convolution(time_kernel, g, t: float, tol: float = 1e-12,
                              singularity: float = 0.0, limit: int = 500) -> float:
    """Adaptive quadrature of ``int_0^t k(s) g(t-s) ds``.

    ``singularity`` is the exponent ``beta > -1`` of a ``s**beta`` endpoint
    singularity of ``k`` at 0.  It is removed by ``s = t v**(1/(beta+1))``,
    which makes the integrand bounded near ``v = 0``.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return 0.0
    if not singularity > -1:
        raise ValueError("endpoint singularity must satisfy beta > -1")

    if singularity == 0:
        def f(s):
            return float(time_kernel(s) * g(t - s))
        a, b = 0.0, t
    else:
        p = 1.0 / (singularity + 1.0)

        def f(v):
            s = t * v ** p
            return float(time_kernel(s) * g(t - s) * t * p * v ** (p - 1))
        a, b = 0.0, 1.0

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, a, b, epsabs=tol, epsrel=tol, limit=limit)
        except integrate.IntegrationWarning as exc:
            raise OracleError(f"quadrature did not converge at t={t}: {exc}") from None
    if not np.isfinite(val) or err > 100 * max(tol, tol * abs(val)):
        raise OracleError(f"quadrature error estimate {err:.3e} too large at t={t}")
    return float(val)


def oracle_fractional_integral(g, alpha: float, t: float, tol: float = 1e-13) -> float:
    """``(1/Gamma(alpha)) int_0^t (t-s)**(alpha-1) g(s) ds`` using the
    algebraic-weight rule of QUADPACK."""
    if t <= 0:
        return 0.0
    if alpha == 1:
        val, err = integrate.quad(g, 0, t, epsabs=tol, epsrel=tol, limit=500)
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                val, err = integrate.quad(lambda s: g(t - s), 0, t, weight="alg",
                                          wvar=(alpha - 1, 0), epsabs=tol, epsrel=tol,
                                          limit=500)
            except integrate.IntegrationWarning as exc:
                raise OracleError(f"quadrature did not converge at t={t}: {exc}") from None
        val /= math.gamma(alpha)
    if err > 100 * max(tol, tol * abs(val)):
        raise OracleError(f"quadrature error estimate {err:.3e} too large at t={t}")
    return float(val)


def oracle_periodic_sum(mu: float, derivatives, t: float, tol: float = 1e-13) -> float:
    """``sum_{j>=0} (d/dt)**mu g (t - j)`` for a ``g`` vanishing to second
    order at 0.

    ``derivatives`` is ``[g, g', g'']``.  Negative ``mu`` is a fractional
    integral of ``g``; for ``0 <= mu < 2`` the derivative is taken as a
    fractional integral of order ``ceil(mu) - mu`` of ``g^(ceil(mu))``,
    which agrees with the Riemann-Liouville derivative when the lower
    derivatives vanish at 0.
    """
    if mu >= 2:
        raise ValueError("mu must be < 2")
    if mu < 0:
        f, order = derivatives[0], -mu
    else:
        n = math.ceil(mu) if mu != int(mu) else int(mu)
        f, order = derivatives[n], n - mu
    total = 0.0
    for j in range(int(math.floor(t)) + 1):
        s = t - j
        if s <= 0:
            continue
        total += f(s) if order == 0 else oracle_fractional_integral(f, order, s, tol)
    return total
