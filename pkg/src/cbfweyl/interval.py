"""Approximate eigenfunctions on the interval ``(-a, a)``.

Two copies of the half-line eigenfunction, one anchored at each end, are
glued with a quadratic bump ``q`` that switches on across ``[-b, b]``:

    phi_n(x) = q(-x) F(a + x) - (-1)^n q(x) F(a - x),   mu = mu_n from the mode equation.

The module also evaluates explicit bounds for ``||phi_n||^2`` and for the
residual ``||A phi_n - lambda_n phi_n||``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import quadrature
from .cbf import BernsteinSpec, levy_tail
from .errors import DomainError
from .halfline import halfline
from .modes import ModeSolution, solve_mode

__all__ = [
    "BumpQ",
    "q",
    "ApproxEigenfunction",
    "approx_eigenfunction",
    "phi_tilde",
    "NormBounds",
    "norm_bounds",
    "ResidualBound",
    "residual_bound",
]


@dataclass(frozen=True)
class BumpQ:
    """Piecewise quadratic switch from 0 (left of ``-b``) to 1 (right of ``b``)."""

    b: float

    def __post_init__(self):
        if not self.b > 0:
            raise DomainError(f"b must be positive, got {self.b}")

    def __call__(self, x):
        t = np.asarray(x, dtype=float) / self.b
        out = np.where(
            t <= -1.0, 0.0,
            np.where(t <= 0.0, 0.5 * (t + 1.0) ** 2, np.where(t <= 1.0, 1.0 - 0.5 * (t - 1.0) ** 2, 1.0)),
        )
        return out if out.ndim else float(out)

    def second_derivative(self, x):
        t = np.asarray(x, dtype=float) / self.b
        out = np.where(np.abs(t) < 1.0, np.where(t < 0, 1.0, -1.0), 0.0) / self.b**2
        return out if out.ndim else float(out)


def q(x, b: float):
    return BumpQ(b)(x)


def _check_geometry(a, b):
    if not (a > 0 and 0 < b < a):
        raise DomainError(f"need 0 < b < a, got a={a}, b={b}")


@dataclass(frozen=True)
class ApproxEigenfunction:
    n: int
    a: float
    b: float
    mode: ModeSolution
    spec: BernsteinSpec

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        h = halfline(self.spec, self.mode.mu)
        bump = BumpQ(self.b)
        inside = np.abs(x) < self.a
        out = np.zeros(x.shape)
        xi = x[inside]
        sign = -1.0 if self.n % 2 == 0 else 1.0
        out[inside] = bump(-xi) * h.F(self.a + xi) + sign * bump(xi) * h.F(self.a - xi)
        return out if out.ndim else float(out)


def approx_eigenfunction(spec: BernsteinSpec, a: float, n: int, b: float | None = None) -> ApproxEigenfunction:
    b = a / 3.0 if b is None else b
    _check_geometry(a, b)
    return ApproxEigenfunction(n=n, a=a, b=b, mode=solve_mode(spec, a, n), spec=spec)


def phi_tilde(spec: BernsteinSpec, a: float, b: float, n: int, x):
    """Value of the approximate eigenfunction at ``x``; zero for ``|x| >= a``."""
    return approx_eigenfunction(spec, a, n, b)(x)


@dataclass(frozen=True)
class NormBounds:
    lower: float
    upper: float
    value: float
    simple_lower: float
    simple_upper: float


def _norm_sq(phi: ApproxEigenfunction, rtol: float) -> float:
    a, b = phi.a, phi.b
    # both halves agree by parity
    pieces = [(0.0, b), (b, a)]
    total = 0.0
    for lo, hi in pieces:
        total += quadrature.quad(
            lambda x: phi(x) ** 2, lo, hi, rtol=rtol, atol=1e-13, limit=800, what="norm of phi"
        )
    return 2.0 * total


def norm_bounds(spec: BernsteinSpec, a: float, b: float, n: int, *, rtol: float = 1e-9) -> NormBounds:
    """Closed-form bounds on ``||phi_n||^2`` together with its quadrature value."""
    _check_geometry(a, b)
    phi = approx_eigenfunction(spec, a, n, b)
    mu = phi.mode.mu
    h = halfline(spec, mu)
    I_mu = h.I()
    st = math.sin(h.theta)
    return NormBounds(
        lower=a - st / mu - 4.0 * I_mu,
        upper=a + st / mu + 4.0 * I_mu * (1.0 + st),
        value=_norm_sq(phi, rtol),
        simple_lower=a - 20.0 * a / (n * math.pi),
        simple_upper=a + 36.0 * a / (n * math.pi),
    )


@dataclass(frozen=True)
class ResidualBound:
    """Upper bound for ``||A_D phi_n - lambda_n phi_n||`` on ``(-a, a)``."""

    value: float
    outer: float
    inner: float
    n: int
    mu: float


def residual_bound(spec: BernsteinSpec, a: float, b: float, n: int) -> ResidualBound:
    _check_geometry(a, b)
    tail = levy_tail(spec)
    mode = solve_mode(spec, a, n)
    mu, lam = mode.mu, mode.lambda_
    h = halfline(spec, mu)
    pts = np.array([a - b, a + b])
    Gb = float(np.sum(h.G(pts)))
    Gb1 = float(np.sum(h.G_deriv(pts, 1)))
    Gb2 = float(np.sum(h.G_deriv(pts, 2)))
    I_mu = h.I()

    def f(fn, z):
        return float(np.asarray(fn(np.asarray(z, dtype=float))))

    nu_a = f(tail.nu, a)
    outer = Gb * f(tail.nu0, 2 * b) / (2 * b * b) + f(tail.nu, 2 * b) * I_mu + 2 * nu_a / mu
    inner = (
        (Gb - 2 * b * Gb1 + b * b * Gb2) * f(tail.nu0, b) / (b * b)
        + 2 * Gb * f(tail.nu_inf, b)
        + f(tail.nu, b) * I_mu
        + lam * Gb / 2
        + 2 * nu_a / mu
    )
    value = math.sqrt(2 * (a - b) * outer**2 + 2 * b * inner**2)
    return ResidualBound(value=value, outer=outer, inner=inner, n=n, mu=mu)
