"""Convolution kernels described by their Laplace transforms.

A :class:`Kernel` carries the transfer function ``K(lambda)`` together with
the analyticity abscissa ``sigma`` and growth exponent ``mu`` such that
``|K(lambda)| <= M |lambda|**mu`` on ``Re(lambda) >= sigma``.  Built-ins also
carry exact convolutions against monomials (needed for the start-up
correction) and, where known, the time-domain kernel for oracle checks.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import mpmath
import numpy as np
from scipy import special

from .errors import KernelDomainError

# kernels singular only on the imaginary axis get this abscissa
DEFAULT_SIGMA = 1e-8


@dataclass(frozen=True)
class Kernel:
    transfer: Callable
    sigma: float
    mu: float
    name: str
    monomial_convolution: Optional[Callable] = None
    time_kernel: Optional[Callable] = None
    # exponent beta of the s**beta endpoint singularity of time_kernel at 0
    singularity: float = 0.0
    params: dict = field(default_factory=dict)
    real: bool = True

    def __call__(self, lam):
        return self.transfer(np.asarray(lam, dtype=complex))

    @property
    def label(self) -> str:
        if not self.params:
            return self.name
        args = ",".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.name}:{args}"

    def check_domain(self, lam, tol=1e-12):
        """Raise :class:`KernelDomainError` for points with Re < sigma."""
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        bad = np.flatnonzero(lam.real < self.sigma - tol * np.maximum(1, np.abs(lam)))
        if bad.size:
            k = int(bad[0])
            raise KernelDomainError(
                f"kernel {self.label!r} evaluated at {lam[k]:.6g}, left of "
                f"its analyticity abscissa sigma={self.sigma:g}",
                point=lam[k], index=k,
            )


def _gamma_ratio(l, nu):
    # Gamma(l+1)/Gamma(l+1+nu); 1/Gamma handles nonpositive-integer poles
    return math.gamma(l + 1) * special.rgamma(l + 1 + nu)


def fractional_kernel(alpha: float) -> Kernel:
    """Riemann-Liouville integral of order ``alpha``: ``K = lambda**-alpha``."""
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")

    def transfer(lam):
        return np.power(lam, -alpha)

    def monomial(l, t):
        t = np.asarray(t, dtype=float)
        return _gamma_ratio(l, alpha) * np.power(t, l + alpha)

    def k(s):
        return np.power(s, alpha - 1) / math.gamma(alpha)

    return Kernel(transfer, DEFAULT_SIGMA, -alpha, "fractional", monomial, k,
                  singularity=alpha - 1, params={"alpha": alpha})


def periodic_sum_kernel(mu: float) -> Kernel:
    """``K(lambda) = lambda**mu / (1 - exp(-lambda))``.

    In the time domain this is ``sum_j (d/dt)**mu g (t - j)``, a sum of
    shifted fractional integrals (``mu < 0``) or derivatives (``mu >= 0``).
    """

    def transfer(lam):
        den = -np.expm1(-lam)
        # at lambda = 2 pi i k the denominator is rounding noise, not zero
        hit = np.abs(den) < 8 * np.finfo(float).eps * np.maximum(1.0, np.exp(-lam.real))
        if np.any(hit):
            k = int(np.flatnonzero(hit)[0])
            raise KernelDomainError(
                f"pole of the periodic-sum kernel at {np.ravel(lam)[k]}",
                point=np.ravel(lam)[k], index=k,
            )
        return np.power(lam, mu) / den

    def monomial(l, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        c = _gamma_ratio(l, -mu)
        for j in range(int(np.floor(np.max(t))) + 1):
            s = t - j
            pos = s > 0
            out[pos] += c * np.power(s[pos], l - mu)
        return out[()] if out.ndim == 0 else out

    return Kernel(transfer, DEFAULT_SIGMA, float(mu), "periodic", monomial,
                  None, params={"mu": mu})


def difference_kernel() -> Kernel:
    """``K(lambda) = 1 - exp(-lambda)``: ``u(t) - u(t-1)``."""

    def transfer(lam):
        return -np.expm1(-lam)

    def monomial(l, t):
        t = np.asarray(t, dtype=float)
        out = np.power(t, l) - np.where(t >= 1, np.power(np.maximum(t - 1, 0), l), 0.0)
        return out

    return Kernel(transfer, 0.0, 0.0, "difference", monomial, None)


def difference_action(u, t):
    """Time-domain action of :func:`difference_kernel` with ``u = 0`` on t<0."""
    t = np.asarray(t, dtype=float)
    return u(t) - np.where(t >= 1, u(np.maximum(t - 1, 0)), 0.0)


def bessel_kernel(omega: float) -> Kernel:
    """``K(lambda) = (omega**2 + lambda**2)**-1/2``, time kernel ``J0(omega t)``.

    The branch is positive on the positive real axis; the cuts run leftward
    from ``+-i omega``.
    """
    if not omega > 0:
        raise ValueError("omega must be positive")

    def transfer(lam):
        a, b = lam + 1j * omega, lam - 1j * omega
        if np.any((a == 0) | (b == 0)):
            raise KernelDomainError(f"branch point +-{omega}i hit by the Bessel kernel")
        return 1.0 / (np.sqrt(a) * np.sqrt(b))

    def monomial(l, t):
        # int_0^t J0(omega s) (t-s)^l ds via the power series of J0
        ts = np.asarray(t, dtype=float).ravel()
        out = np.empty_like(ts)
        for idx, tv in enumerate(ts):
            with mpmath.workdps(30 + int(omega * tv)):
                x = (mpmath.mpf(omega) * tv / 2) ** 2
                tv_ = mpmath.mpf(tv)
                term_sum = mpmath.nsum(
                    lambda k: (-x) ** k / mpmath.factorial(k) ** 2
                    * mpmath.beta(2 * k + 1, l + 1),
                    [0, mpmath.inf],
                )
                out[idx] = float(tv_ ** (l + 1) * term_sum)
        return out[0] if np.ndim(t) == 0 else out.reshape(np.shape(t))

    def k(s):
        return special.j0(omega * np.asarray(s, dtype=float))

    return Kernel(transfer, DEFAULT_SIGMA, -1.0, "bessel", monomial, k,
                  params={"omega": omega})


def exponential_kernel(rate: float = 1.0) -> Kernel:
    """``K(lambda) = 1/(lambda + rate)``, time kernel ``exp(-rate t)``."""
    if rate == 0:
        raise ValueError("rate must be nonzero; use fractional_kernel(1) for 1/lambda")

    def transfer(lam):
        return 1.0 / (lam + rate)

    def monomial(l, t):
        # int_0^t exp(-rate s)(t-s)^l ds
        #   = l! (-1)^(l+1) rate^-(l+1) [exp(-x) - sum_{k<=l} (-x)^k/k!],  x = rate t
        # the bracket cancels to O(x^(l+1)), hence the extra digits
        ts = np.asarray(t, dtype=float).ravel()
        out = np.empty_like(ts)
        with mpmath.workdps(60 + 4 * l):
            r = mpmath.mpf(rate)
            for idx, tv in enumerate(ts):
                x = r * mpmath.mpf(tv)
                tail = mpmath.exp(-x) - mpmath.fsum(
                    (-x) ** k / mpmath.factorial(k) for k in range(l + 1))
                out[idx] = float(mpmath.factorial(l) * (-1) ** (l + 1)
                                 / r ** (l + 1) * tail)
        return out[0] if np.ndim(t) == 0 else out.reshape(np.shape(t))

    def k(s):
        return np.exp(-rate * np.asarray(s, dtype=float))

    sigma = DEFAULT_SIGMA if rate > 0 else -rate + DEFAULT_SIGMA
    return Kernel(transfer, sigma, -1.0, "exp", monomial, k,
                  params={"rate": rate})


def identity_kernel() -> Kernel:
    """``K = 1``; the convolution operator is the identity."""

    def transfer(lam):
        return np.ones_like(lam, dtype=complex)

    def monomial(l, t):
        return np.power(np.asarray(t, dtype=float), l)

    return Kernel(transfer, -np.inf, 0.0, "identity", monomial, None)


def custom_kernel(transfer, sigma, mu, monomial_convolution=None, *,
                  name="custom", time_kernel=None, singularity=0.0,
                  real=True, check_growth=True) -> Kernel:
    """Wrap a user transfer function.  A growth spot-check is run and only
    warns on failure."""
    kern = Kernel(transfer, float(sigma), float(mu), name,
                  monomial_convolution, time_kernel, singularity, real=real)
    if check_growth:
        ok, spread = growth_spot_check(kern)
        if not ok:
            warnings.warn(
                f"kernel {name!r}: |K|/|lambda|^mu varies by {spread:.3g} "
                f"across decades; mu={mu} may be wrong", RuntimeWarning,
                stacklevel=2)
    return kern


def growth_spot_check(kernel: Kernel, samples=200, seed=0, max_spread=1e3):
    """Check ``|K(lambda)|/|lambda|**mu`` over ``|lambda|`` in [1, 1e6].

    Returns ``(ok, spread)`` where ``spread`` is the ratio between the
    largest and smallest per-decade maxima.
    """
    rng = np.random.default_rng(seed)
    radius = 10.0 ** rng.uniform(0, 6, samples)
    angle = rng.uniform(-np.pi / 2 + 0.2, np.pi / 2 - 0.2, samples)
    lam = radius * np.exp(1j * angle)
    sig = kernel.sigma if np.isfinite(kernel.sigma) else 0.0
    lam = lam + max(sig, 0.0)
    ratio = np.abs(kernel(lam)) / np.abs(lam) ** kernel.mu
    if not np.all(np.isfinite(ratio)):
        return False, np.inf
    decade = np.floor(np.log10(np.abs(lam))).astype(int)
    peaks = [ratio[decade == d].max() for d in np.unique(decade)]
    spread = max(peaks) / min(peaks)
    return bool(spread < max_spread), float(spread)


REGISTRY = {
    "fractional": fractional_kernel,
    "periodic": periodic_sum_kernel,
    "difference": difference_kernel,
    "bessel": bessel_kernel,
    "exp": exponential_kernel,
    "identity": identity_kernel,
}


def parse_kernel(spec: str) -> Kernel:
    """Build a registered kernel from ``name`` or ``name:key=value,...``.

    >>> parse_kernel("fractional:alpha=0.5").mu
    -0.5
    """
    name, _, rest = spec.partition(":")
    if name not in REGISTRY:
        raise KeyError(f"unknown kernel {name!r}; known: {sorted(REGISTRY)}")
    kwargs = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise ValueError(f"kernel parameter {item!r} is not key=value")
        kwargs[key.strip()] = float(val)
    return REGISTRY[name](**kwargs)
