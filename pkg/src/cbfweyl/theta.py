"""The phase shift ``theta_mu`` of the half-line eigenfunctions, its
derivative in ``mu`` and closed-form two-sided bounds.

Both integrals are written through divided differences of ``psi``:

    theta_mu = (1/pi) int_0^1 [log S(mu^2 z^2, mu^2) - log S(mu^2, mu^2/z^2)] / (1 - z^2) dz

where ``S(x, y) = (psi(x) - psi(y)) / (x - y)``.  The bracket vanishes at
``z = 1`` to first order, so the integrand stays bounded there without any
special patch.  On ``[0, 1/2]`` the substitution ``z = exp(-t)`` turns the
logarithmic growth at ``z = 0`` into an exponentially decaying tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import quadrature
from .cbf import BernsteinSpec, pq
from .errors import DomainError, InternalInconsistencyError

__all__ = ["PhaseResult", "theta", "dtheta", "theta_bounds", "phase", "T_MAX", "DEFAULT_RTOL"]

DEFAULT_RTOL = 1e-9
T_MAX = 40.0
_SPLIT = 0.5


def _check_mu(mu):
    mu = float(mu)
    if not (mu > 0 and math.isfinite(mu)):
        raise DomainError(f"mu must be positive, got {mu}")
    return mu


def _integrate_unit(g, rtol, what):
    """``int_0^1 g(z) dz`` with ``z = exp(-t)`` on ``[0, 1/2]``."""
    head = quadrature.quad(g, _SPLIT, 1.0, rtol=rtol, atol=1e-15, what=what)
    tail = quadrature.quad(
        lambda t: g(math.exp(-t)) * math.exp(-t), math.log(1.0 / _SPLIT), T_MAX,
        rtol=rtol, atol=1e-15, what=what,
    )
    return head + tail


def _theta_integrand(spec: BernsteinSpec, mu: float):
    x = mu * mu

    def g(z):
        if z >= 1.0:
            z = 1.0 - 1e-16
        inner = float(spec.secant(x * z * z, x))
        outer = float(spec.secant(x, x / (z * z)))
        return math.log(inner / outer) / ((1.0 - z) * (1.0 + z))

    return g


def theta(spec: BernsteinSpec, mu, *, rtol: float = DEFAULT_RTOL) -> float:
    """Phase shift ``theta_mu`` in ``[0, pi/2)``."""
    mu = _check_mu(mu)
    return _integrate_unit(_theta_integrand(spec, mu), rtol, "theta") / math.pi


def _secant_h(spec, x, y):
    # divided difference of h(s) = s psi'(s)
    return x * float(spec.secant_d1(x, y)) + float(spec.d1(y))


def dtheta(spec: BernsteinSpec, mu, *, rtol: float = DEFAULT_RTOL) -> float:
    """Derivative ``d theta_mu / d mu``."""
    mu = _check_mu(mu)
    x = mu * mu

    def g(z):
        if z >= 1.0:
            z = 1.0 - 1e-16
        lo, hi = x * z * z, x / (z * z)
        t1 = _secant_h(spec, lo, x) / float(spec.secant(lo, x))
        t2 = _secant_h(spec, x, hi) / float(spec.secant(x, hi))
        return (t1 - t2) / ((1.0 - z) * (1.0 + z))

    return 2.0 / (math.pi * mu) * _integrate_unit(g, rtol, "dtheta")


def _asin2(v):
    return math.asin(math.sqrt(min(max(v, 0.0), 1.0))) ** 2


def bounds_from_pq(P: float, Q: float) -> tuple[float, float]:
    """Lower and upper bounds for ``theta`` in terms of ``P`` and ``Q``."""
    if P + Q > 1.0 + 1e-12 or P < -1e-12 or Q < -1e-12:
        raise InternalInconsistencyError(f"P = {P!r}, Q = {Q!r} violate 0 <= P, Q and P + Q <= 1")
    P = min(max(P, 0.0), 1.0)
    Q = min(max(Q, 0.0), 1.0 - P)
    lowers = [2.0 / math.pi * _asin2(Q)]
    uppers = [math.pi / 2 - 2.0 / math.pi * _asin2(1.0 - Q), math.pi / 2 - math.asin(math.sqrt(P))]
    if P < 1.0:
        r = Q / (1.0 - P)
        s = P * Q / (1.0 - P)
        lowers.append((_asin2(Q) + _asin2(r) - _asin2(s)) / math.pi)
        uppers.append(math.pi / 4 - (_asin2(1.0 - Q) + _asin2(1.0 - r) - _asin2(1.0 - s)) / math.pi)
    return max(0.0, max(lowers)), max(0.0, min(uppers))


def theta_bounds(spec: BernsteinSpec, mu) -> tuple[float, float]:
    """Tightest of the closed-form lower and upper bounds on ``theta_mu``."""
    P, Q = pq(spec, _check_mu(mu))
    return bounds_from_pq(float(P), float(Q))


@dataclass(frozen=True)
class PhaseResult:
    mu: float
    theta: float
    dtheta: float
    lower: float
    upper: float


def phase(spec: BernsteinSpec, mu, *, rtol: float = DEFAULT_RTOL) -> PhaseResult:
    """Everything the ``theta`` table reports for one ``mu``."""
    mu = _check_mu(mu)
    lo, hi = theta_bounds(spec, mu)
    return PhaseResult(mu, theta(spec, mu, rtol=rtol), dtheta(spec, mu, rtol=rtol), lo, hi)


def theta_vector(spec: BernsteinSpec, mus, *, rtol: float = DEFAULT_RTOL) -> np.ndarray:
    return np.array([theta(spec, m, rtol=rtol) for m in np.atleast_1d(mus)])
