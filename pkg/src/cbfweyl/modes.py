"""Asymptotic eigenvalues from the mode equation ``a mu + theta_mu = n pi / 2``."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .cbf import BernsteinSpec, moderate_growth_probe
from .errors import BracketError, DomainError
from .theta import DEFAULT_RTOL, dtheta, theta

__all__ = ["ModeSolution", "solve_mode", "first_order_mu", "mode_table", "RESIDUAL_TOL"]

RESIDUAL_TOL = 1e-9
_SCAN_POINTS = 64


@dataclass(frozen=True)
class ModeSolution:
    n: int
    a: float
    mu: float
    theta: float
    lambda_: float

    @property
    def residual(self) -> float:
        return self.a * self.mu + self.theta - self.n * math.pi / 2

    def as_row(self) -> dict:
        return {"n": self.n, "mu": self.mu, "theta": self.theta, "lambda": self.lambda_}


def _validate(a, n):
    if not (a > 0 and math.isfinite(a)):
        raise DomainError(f"half-width a must be positive, got {a}")
    if int(n) != n or n < 1:
        raise DomainError(f"mode index n must be a positive integer, got {n}")


def _root(g, dg, lo, hi, glo, ghi, tol, max_iter=100):
    """Safeguarded Newton on a bracket with ``glo < 0 < ghi``."""
    x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        gx = g(x)
        if abs(gx) <= tol:
            return x, gx
        if gx < 0:
            lo = x
        else:
            hi = x
        step = gx / dg(x)
        x_new = x - step
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if hi - lo < 4e-16 * hi:
            return x_new, g(x_new)
        x = x_new
    gx = g(x)
    return x, gx


def solve_mode(
    spec: BernsteinSpec, a: float, n: int, *, tol: float = 1e-12, rtol: float = DEFAULT_RTOL,
    check_growth: bool = False,
) -> ModeSolution:
    """Largest root ``mu`` of ``a mu + theta_mu = n pi / 2``.

    The root lies in ``[(n-1) pi/(2a), n pi/(2a)]`` because ``theta`` takes
    values in ``[0, pi/2)``.  For ``n >= 3`` it is unique; for ``n`` in
    ``{1, 2}`` the bracket is scanned and the rightmost sign change is
    refined.
    """
    _validate(a, n)
    if check_growth and not moderate_growth_probe(spec).passes:
        warnings.warn(f"{spec.label()} fails the moderate growth probe", RuntimeWarning, stacklevel=2)
    target = n * math.pi / 2

    def g(mu):
        return a * mu + theta(spec, mu, rtol=rtol) - target

    def dg(mu):
        return a + dtheta(spec, mu, rtol=rtol)

    hi = n * math.pi / (2 * a)
    lo = (n - 1) * math.pi / (2 * a)
    if n == 1:
        lo = hi * 1e-9
    ghi = g(hi)
    if ghi < 0:
        raise BracketError("mode equation positive at upper bracket end was expected", n=n, g_hi=ghi)
    if ghi == 0.0:
        mu = hi
    else:
        if n <= 2:
            grid = np.linspace(lo, hi, _SCAN_POINTS + 1)
            values = [g(m) for m in grid[:-1]] + [ghi]
            idx = [i for i in range(_SCAN_POINTS) if values[i] < 0 <= values[i + 1]]
            if not idx:
                raise BracketError("no sign change of the mode equation in its bracket", n=n, a=a)
            i = idx[-1]
            lo, glo, hi, ghi = grid[i], values[i], grid[i + 1], values[i + 1]
        else:
            glo = g(lo)
            if glo > 0:
                raise BracketError("no sign change of the mode equation in its bracket", n=n, g_lo=glo)
        mu, _ = _root(g, dg, lo, hi, glo, ghi, tol)
    th = theta(spec, mu, rtol=rtol)
    sol = ModeSolution(n=int(n), a=float(a), mu=float(mu), theta=th, lambda_=float(spec.psi(mu * mu)))
    if abs(sol.residual) > RESIDUAL_TOL:
        raise BracketError("mode equation residual above tolerance", n=n, residual=sol.residual)
    return sol


def first_order_mu(spec: BernsteinSpec, a: float, n: int, *, rtol: float = DEFAULT_RTOL) -> float:
    """One-shot approximation ``n pi/(2a) - theta(n pi/(2a)) / a``."""
    _validate(a, n)
    m0 = n * math.pi / (2 * a)
    return m0 - theta(spec, m0, rtol=rtol) / a


def mode_table(spec: BernsteinSpec, a: float, n_max: int, **kw) -> list[ModeSolution]:
    """Solutions for ``n = 1 .. n_max``."""
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    return [solve_mode(spec, a, n, **kw) for n in range(1, n_max + 1)]
