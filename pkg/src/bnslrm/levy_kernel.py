"""Levy measure of the IG-OU subordinator and its derived constants.

The jump intensity (per unit of calendar time) of the time-changed
background driving process ``H_{lambda t}`` is

    f(x) = a*lam / (2*sqrt(2*pi)) * x**-1.5 * (1 + b**2 x) * exp(-b**2 x / 2),   x > 0,

and the leverage-weighted density is ``g(x) = (exp(rho*x) - 1) * f(x)``.
``f`` splits into an infinite-activity part ``f1 ~ x**-1.5 exp(-b**2 x/2)`` and
a finite part ``f2 ~ x**-0.5 exp(-b**2 x/2)`` whose total mass is
``a*lam*b/2`` (a Gamma(1/2, b**2/2) jump law).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

DEFAULT_EPSILON = 1e-8

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_QUAD_EPSREL = 1e-12
_QUAD_LIMIT = 500


def _check_positive(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("Levy density is only defined for x > 0")
    return x


def _leverage_over_rho(rho, x):
    """``expm1(rho x) / rho``, well scaled even for subnormal ``rho`` (``x`` in the rho -> 0 limit)."""
    rx = rho * x
    if abs(rx) < 1e-8:
        return x * (1.0 + 0.5 * rx)
    return math.expm1(rx) / rho


def _scalar_or_array(value, like):
    return float(value) if np.ndim(like) == 0 else value


def quad_sqrt(func, lo, hi, epsrel=_QUAD_EPSREL):
    """Integrate ``func`` over ``[lo, hi]`` after substituting ``x = u**2``.

    The substitution turns the ``x**-1/2`` endpoint behaviour at 0 into a
    bounded integrand, so QUADPACK converges to near machine precision.
    ``hi`` may be ``inf``.
    """
    if hi <= lo:
        return 0.0
    ulo = math.sqrt(lo)
    uhi = math.sqrt(hi) if math.isfinite(hi) else math.inf

    def integrand(u):
        return 2.0 * u * func(u * u) if u > 0 else 0.0

    if math.isfinite(uhi):
        value, _ = integrate.quad(integrand, ulo, uhi, epsabs=0.0, epsrel=epsrel, limit=_QUAD_LIMIT)
        return value
    # split so the finite piece carries the bulk and the tail is exponentially small
    mid = max(ulo, 1.0)
    head = 0.0
    if mid > ulo:
        head, _ = integrate.quad(integrand, ulo, mid, epsabs=0.0, epsrel=epsrel, limit=_QUAD_LIMIT)
    tail, _ = integrate.quad(integrand, mid, math.inf, epsabs=0.0, epsrel=epsrel, limit=_QUAD_LIMIT)
    return head + tail


@dataclass(frozen=True)
class LevyKernel:
    """Deterministic quantities of the IG-OU Levy measure for fixed ``(a, b, lam, rho, epsilon)``.

    Build with :meth:`LevyKernel.from_params`; the derived fields are filled in there.
    """

    a: float
    b: float
    lam: float
    rho: float
    c1: float
    c2: float
    epsilon: float
    mu_eps: float
    gamma_eps: float
    rate_cp2: float
    rate_cp1_eps: float

    @classmethod
    def from_params(cls, a, b, lam, rho, epsilon=DEFAULT_EPSILON):
        if not (a > 0 and b > 0 and lam > 0):
            raise ValueError(f"a, b and lambda must be positive (got a={a}, b={b}, lambda={lam})")
        if rho > 0:
            raise ValueError(f"rho must be non-positive (got {rho})")
        if not epsilon > 0:
            raise ValueError(f"epsilon must be positive (got {epsilon})")
        a, b, lam, rho, epsilon = float(a), float(b), float(lam), float(rho), float(epsilon)
        c1 = c_rho_1(a, b, lam, rho)
        c2 = c_rho_2(a, b, lam, rho)
        mu_eps, gamma_eps, rate_cp1 = _truncation(a, b, lam, rho, epsilon)
        return cls(
            a=a, b=b, lam=lam, rho=rho, c1=c1, c2=c2, epsilon=epsilon,
            mu_eps=mu_eps, gamma_eps=gamma_eps,
            rate_cp2=a * lam * b / 2.0, rate_cp1_eps=rate_cp1,
        )

    @property
    def scale(self):
        """Common prefactor ``a*lam / (2 sqrt(2 pi))``."""
        return self.a * self.lam / (2.0 * _SQRT_2PI)

    @property
    def half_b2(self):
        return 0.5 * self.b * self.b

    def levy_density(self, x):
        x = _check_positive(x)
        out = self.scale * x ** -1.5 * (1.0 + self.b * self.b * x) * np.exp(-self.half_b2 * x)
        return _scalar_or_array(out, x)

    def density_cp1(self, x):
        """Infinite-activity part ``f1`` of the Levy density."""
        x = _check_positive(x)
        return _scalar_or_array(self.scale * x ** -1.5 * np.exp(-self.half_b2 * x), x)

    def density_cp2(self, x):
        """Finite-activity part ``f2``; integrates to ``rate_cp2``."""
        x = _check_positive(x)
        return _scalar_or_array(self.scale * self.b * self.b * x ** -0.5 * np.exp(-self.half_b2 * x), x)

    def g_density(self, x):
        x = _check_positive(x)
        return _scalar_or_array(np.expm1(self.rho * x) * self.levy_density(x), x)

    def c_rho_1(self):
        return self.c1

    def c_rho_2(self):
        return self.c2

    def integrate_g(self, lo, hi):
        """Adaptive quadrature of ``g`` over ``[lo, hi]`` (``lo`` may be 0, ``hi`` may be inf)."""
        if self.rho == 0.0:
            return 0.0
        # integrate g / rho so a tiny rho does not push the integrand into subnormals
        return self.rho * quad_sqrt(lambda x: _leverage_over_rho(self.rho, x) * self._f_scalar(x), lo, hi)

    def _f_scalar(self, x):
        return self.scale * x ** -1.5 * (1.0 + self.b * self.b * x) * math.exp(-self.half_b2 * x)

    def truncation_quantities(self, epsilon):
        """``(mu_eps, gamma_eps, rate_cp1_eps)`` for an arbitrary threshold."""
        if not epsilon > 0:
            raise ValueError(f"epsilon must be positive (got {epsilon})")
        return _truncation(self.a, self.b, self.lam, self.rho, float(epsilon))


def c_rho_1(a, b, lam, rho):
    """Closed form of the integral of g over (0, inf)."""
    return rho * lam * a / math.sqrt(b * b - 2.0 * rho)


def c_rho_2(a, b, lam, rho):
    """Closed form of the integral of (exp(rho x) - 1)**2 f(x) over (0, inf)."""
    return 2.0 * rho * lam * a * (1.0 / math.sqrt(b * b - 4.0 * rho) - 1.0 / math.sqrt(b * b - 2.0 * rho))


def _truncation(a, b, lam, rho, epsilon):
    scale = a * lam / (2.0 * _SQRT_2PI)
    k = 0.5 * b * b

    def f(x):
        return scale * x ** -1.5 * (1.0 + b * b * x) * math.exp(-k * x)

    mu_eps = quad_sqrt(lambda x: x * f(x), 0.0, epsilon, epsrel=1e-10)
    gamma_eps = 0.0 if rho == 0.0 else rho * quad_sqrt(
        lambda x: _leverage_over_rho(rho, x) * f(x), 0.0, epsilon, epsrel=1e-10)
    # x**-1.5 tail: integrate in v = x**-1/2 which maps (eps, inf) to (0, eps**-1/2)
    vmax = epsilon ** -0.5
    rate, _ = integrate.quad(
        lambda v: 2.0 * scale * math.exp(-k / (v * v)) if v > 0 else 0.0,
        0.0, vmax, epsabs=0.0, epsrel=1e-10, limit=_QUAD_LIMIT,
    )
    return mu_eps, gamma_eps, rate
