"""Complete Bernstein functions.

A complete Bernstein function with ``psi(0) = 0`` has the representation

    psi(x) = c x + (1/pi) * int_0^inf x / (x + z) * m(z) / z dz

with a drift ``c >= 0`` and a nonnegative density ``m``.  Every family here
exposes ``psi`` and its first three derivatives, divided differences (which
keep ``psi(x) - psi(y)`` accurate when ``x`` and ``y`` are close), and the
boundary values ``psi(-s + i0)`` on the cut.  Those boundary values replace
every ``eps -> 0+`` limit downstream: ``Im psi(-s + i0) = m(s)``.

Closed families are vectorised over numpy arrays.  ``MeasureDefined`` works
from the integral representation with adaptive quadrature and is therefore
slow; it is meant for cross-checks, not for large Galerkin runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, ClassVar

import numpy as np
from scipy import special

from . import quadrature
from .errors import BranchPointError, ConfigError, DomainError, UnsupportedFamilyError

__all__ = [
    "BernsteinSpec",
    "Power",
    "SumOfPowers",
    "KleinGordon",
    "Log1p",
    "MeasureDefined",
    "LevyTail",
    "GrowthDiagnostic",
    "evaluate",
    "deriv",
    "boundary_values",
    "pq",
    "moderate_growth_probe",
    "levy_tail",
    "parse_psi",
    "spec_from_mapping",
]


def _as_float(x):
    return np.asarray(x, dtype=float)


def _pow_dd(x, y, q):
    """Divided difference ``(x**q - y**q) / (x - y)``, stable for x close to y."""
    x, y = np.broadcast_arrays(_as_float(x), _as_float(y))
    if q == 0:
        return np.zeros(x.shape)
    hi = np.maximum(x, y)
    lo = np.minimum(x, y)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.log(lo / hi)
        ratio = np.where(t == 0.0, q, np.expm1(q * t) / np.expm1(t))
    return hi ** (q - 1.0) * ratio


def _scalar_or_array(value, like):
    if np.ndim(like) == 0:
        return float(value)
    return value


@dataclass(frozen=True)
class BernsteinSpec:
    """Base class; concrete families override the evaluation hooks."""

    family: ClassVar[str] = "abstract"
    #: start of the support of ``m`` on the cut; ``psi(-s + i0)`` is real below it
    cut_start: ClassVar[float] = 0.0

    @property
    def drift(self) -> float:
        return 0.0

    @property
    def bounded(self) -> bool:
        return False

    # -- evaluation hooks (array in, array out) ---------------------------
    def psi(self, x):
        raise NotImplementedError

    def d1(self, x):
        raise NotImplementedError

    def d2(self, x):
        raise NotImplementedError

    def d3(self, x):
        raise NotImplementedError

    def secant(self, x, y):
        """``(psi(x) - psi(y)) / (x - y)``, equal to ``psi'(x)`` when x == y."""
        raise NotImplementedError

    def secant_d1(self, x, y):
        """Divided difference of ``psi'``."""
        raise NotImplementedError

    def boundary(self, s):
        """``(Re, Im)`` of ``psi(-s + i0)`` for ``s > 0``."""
        raise NotImplementedError

    def density(self, s):
        """The density ``m(s)``, which equals ``Im psi(-s + i0)``."""
        return self.boundary(s)[1]

    def psi_rest(self, x):
        """``psi(x) - c x``: the part of the symbol without the drift."""
        return self.psi(x) - self.drift * _as_float(x)

    def psi_complex(self, w):
        """Analytic continuation of ``psi`` to ``w`` off the cut ``(-inf, -cut_start]``."""
        raise NotImplementedError

    def nu_closed(self, z):
        """Closed-form Levy density, or ``None`` when none is implemented."""
        return None

    def label(self) -> str:
        return self.family

    def to_mapping(self) -> dict:
        return {"family": self.family}


@dataclass(frozen=True)
class Power(BernsteinSpec):
    """``psi(x) = x**(alpha/2)``, the fractional Laplacian symbol."""

    alpha: float = 1.0
    family: ClassVar[str] = "power"

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise DomainError(f"power family requires 0 < alpha <= 2, got {self.alpha}")

    @property
    def p(self):
        return 0.5 * self.alpha

    @property
    def drift(self):
        return 1.0 if self.alpha == 2.0 else 0.0

    def psi(self, x):
        return _as_float(x) ** self.p

    def d1(self, x):
        return self.p * _as_float(x) ** (self.p - 1.0)

    def d2(self, x):
        p = self.p
        return p * (p - 1.0) * _as_float(x) ** (p - 2.0)

    def d3(self, x):
        p = self.p
        return p * (p - 1.0) * (p - 2.0) * _as_float(x) ** (p - 3.0)

    def secant(self, x, y):
        return _pow_dd(x, y, self.p)

    def secant_d1(self, x, y):
        return self.p * _pow_dd(x, y, self.p - 1.0)

    def psi_rest(self, x):
        if self.alpha == 2.0:
            return np.zeros(np.shape(x))
        return self.psi(x)

    def psi_complex(self, w):
        return np.asarray(w, dtype=complex) ** self.p

    def boundary(self, s):
        s = _as_float(s)
        if self.alpha == 2.0:
            return -s, np.zeros(s.shape)
        mod = s**self.p
        return mod * math.cos(math.pi * self.p), mod * math.sin(math.pi * self.p)

    def levy_constant(self) -> float:
        """``C`` in ``nu(z) = C |z|**(-1-alpha)``."""
        if self.alpha == 2.0:
            return 0.0
        a = self.alpha
        return math.gamma(1.0 + a) * math.sin(0.5 * math.pi * a) / math.pi

    def nu_closed(self, z):
        return self.levy_constant() * np.abs(_as_float(z)) ** (-1.0 - self.alpha)

    def label(self):
        return f"power({self.alpha:g})"

    def to_mapping(self):
        return {"family": self.family, "alpha": self.alpha}


@dataclass(frozen=True)
class SumOfPowers(BernsteinSpec):
    """``psi(x) = x**(alpha/2) + x**(beta/2)`` with ``0 < beta < alpha <= 2``."""

    alpha: float = 1.0
    beta: float = 0.5
    family: ClassVar[str] = "sum_of_powers"

    def __post_init__(self):
        if not 0.0 < self.beta < self.alpha <= 2.0:
            raise DomainError(
                f"sum_of_powers requires 0 < beta < alpha <= 2, got {self.alpha}, {self.beta}"
            )

    @property
    def _parts(self):
        return Power(self.alpha), Power(self.beta)

    @property
    def drift(self):
        return self._parts[0].drift

    def psi(self, x):
        a, b = self._parts
        return a.psi(x) + b.psi(x)

    def d1(self, x):
        a, b = self._parts
        return a.d1(x) + b.d1(x)

    def d2(self, x):
        a, b = self._parts
        return a.d2(x) + b.d2(x)

    def d3(self, x):
        a, b = self._parts
        return a.d3(x) + b.d3(x)

    def secant(self, x, y):
        a, b = self._parts
        return a.secant(x, y) + b.secant(x, y)

    def secant_d1(self, x, y):
        a, b = self._parts
        return a.secant_d1(x, y) + b.secant_d1(x, y)

    def psi_rest(self, x):
        a, b = self._parts
        return a.psi_rest(x) + b.psi_rest(x)

    def psi_complex(self, w):
        a, b = self._parts
        return a.psi_complex(w) + b.psi_complex(w)

    def boundary(self, s):
        (ua, va), (ub, vb) = (p.boundary(s) for p in self._parts)
        return ua + ub, va + vb

    def nu_closed(self, z):
        a, b = self._parts
        return a.nu_closed(z) + b.nu_closed(z)

    def label(self):
        return f"sum_of_powers({self.alpha:g},{self.beta:g})"

    def to_mapping(self):
        return {"family": self.family, "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class KleinGordon(BernsteinSpec):
    """``psi(x) = (1 + x)**(1/2) - 1``, the relativistic (mass 1) symbol."""

    family: ClassVar[str] = "klein_gordon"
    cut_start: ClassVar[float] = 1.0

    def psi(self, x):
        x = _as_float(x)
        return x / (np.sqrt(1.0 + x) + 1.0)

    def psi_complex(self, w):
        w = np.asarray(w, dtype=complex)
        return w / (np.sqrt(1.0 + w) + 1.0)

    def d1(self, x):
        return 0.5 / np.sqrt(1.0 + _as_float(x))

    def d2(self, x):
        return -0.25 * (1.0 + _as_float(x)) ** -1.5

    def d3(self, x):
        return 0.375 * (1.0 + _as_float(x)) ** -2.5

    def secant(self, x, y):
        return 1.0 / (np.sqrt(1.0 + _as_float(x)) + np.sqrt(1.0 + _as_float(y)))

    def secant_d1(self, x, y):
        return 0.5 * _pow_dd(1.0 + _as_float(x), 1.0 + _as_float(y), -0.5)

    def boundary(self, s):
        s = _as_float(s)
        if np.any(s == 1.0):
            raise BranchPointError("klein_gordon boundary value requested at the branch point s = 1")
        below = s < 1.0
        with np.errstate(invalid="ignore"):
            u = np.where(below, -s / (np.sqrt(np.abs(1.0 - s)) + 1.0), -1.0)
            v = np.where(below, 0.0, np.sqrt(np.abs(s - 1.0)))
        return u, v

    def nu_closed(self, z):
        z = np.abs(_as_float(z))
        return special.k1(z) / (math.pi * z)

    def label(self):
        return "klein_gordon"


@dataclass(frozen=True)
class Log1p(BernsteinSpec):
    """``psi(x) = log(1 + x)``; slowly varying, fails the moderate growth condition."""

    family: ClassVar[str] = "log1p"
    cut_start: ClassVar[float] = 1.0

    def psi(self, x):
        return np.log1p(_as_float(x))

    def psi_complex(self, w):
        return np.log1p(np.asarray(w, dtype=complex))

    def d1(self, x):
        return 1.0 / (1.0 + _as_float(x))

    def d2(self, x):
        return -1.0 / (1.0 + _as_float(x)) ** 2

    def d3(self, x):
        return 2.0 / (1.0 + _as_float(x)) ** 3

    def secant(self, x, y):
        x, y = np.broadcast_arrays(_as_float(x), _as_float(y))
        x, y = np.minimum(x, y), np.maximum(x, y)
        d = (x - y) / (1.0 + y)
        with np.errstate(divide="ignore", invalid="ignore"):
            near = np.where(np.abs(d) < 1e-8, 1.0 - d / 2.0 + d * d / 3.0, np.log1p(d) / d) / (1.0 + y)
            far = (np.log1p(x) - np.log1p(y)) / (x - y)
        return np.where(d > -0.5, near, far)

    def secant_d1(self, x, y):
        return -1.0 / ((1.0 + _as_float(x)) * (1.0 + _as_float(y)))

    def boundary(self, s):
        s = _as_float(s)
        if np.any(s == 1.0):
            raise BranchPointError("log1p boundary value requested at the branch point s = 1")
        below = s < 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.where(below, np.log1p(-np.minimum(s, 1.0)), np.log(np.abs(s - 1.0)))
        v = np.where(below, 0.0, math.pi)
        return u, v

    def label(self):
        return "log1p"


# -- measure-defined family ------------------------------------------------


def _log_density(z):
    z = np.asarray(z, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(z > 1.0, math.pi * np.log(np.where(z > 1.0, z, 2.0)), 0.0)


def _power_density(alpha):
    def m(z):
        return math.sin(0.5 * math.pi * alpha) * np.asarray(z, dtype=float) ** (0.5 * alpha)

    return m


def _builtin_density(name: str):
    """Resolve a named density to ``(callable, support_start)``."""
    if name == "log":
        # slowly varying example with psi(x) = -Li_2(-x) ~ (log x)^2 / 2
        return _log_density, 1.0
    if name.startswith("power"):
        inner = name[len("power"):].strip("()")
        alpha = float(inner) if inner else 1.0
        if not 0.0 < alpha < 2.0:
            raise DomainError(f"power density needs 0 < alpha < 2, got {alpha}")
        return _power_density(alpha), 0.0
    raise ConfigError(f"unknown built-in density {name!r}; known: 'log', 'power(<alpha>)'")


_ATOL_FLOOR = 1e-14


@dataclass(frozen=True)
class MeasureDefined(BernsteinSpec):
    """``psi`` given by drift ``c`` and a named built-in density ``m``.

    All quantities come from the integral representation by adaptive
    quadrature (relative tolerance ``rtol``), derivatives by differentiating
    under the integral sign.
    """

    density_name: str = "log"
    c: float = 0.0
    rtol: float = 1e-10
    family: ClassVar[str] = "measure_defined"
    _m: Callable = field(init=False, repr=False, compare=False)
    _start: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.c < 0:
            raise DomainError("drift c must be nonnegative")
        m, start = _builtin_density(self.density_name)
        object.__setattr__(self, "_m", m)
        object.__setattr__(self, "_start", start)
        self._check_integrability()

    def _check_integrability(self):
        z = np.logspace(-12, 12, 241)
        weight = np.minimum(1.0 / z, 1.0 / z**2) * self._m(z) * z
        if not np.all(np.isfinite(weight)) or np.any(self._m(z) < 0):
            raise DomainError("density must be finite and nonnegative")
        # the integrand against dz/z must decay at both ends of the log grid
        if weight[0] > 1e-3 * weight.max() or weight[-1] > 1e-3 * weight.max():
            raise DomainError("density violates int min(1/z, 1/z^2) m(z) dz < inf")

    @property
    def cut_start(self):  # type: ignore[override]
        return self._start

    @property
    def drift(self):
        return self.c

    def _integral(self, kernel, breaks):
        """``(1/pi) int kernel(z) m(z) dz`` over the support, split at ``breaks``."""
        lo = math.log(self._start) if self._start > 0 else None
        pts = sorted({math.log(b) for b in breaks if b > 0 and (lo is None or math.log(b) > lo)})

        def f(u):
            if abs(u) > 700.0:  # the weighted integrand vanishes at both ends
                return 0.0
            z = math.exp(u)
            try:
                return kernel(z) * float(self._m(z)) * z
            except (OverflowError, ZeroDivisionError):
                return 0.0

        edges = ([lo] if lo is not None else [-math.inf]) + pts + [math.inf]
        if lo is None:
            edges[0] = -math.inf
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            total += quadrature.quad(f, a, b, rtol=self.rtol, atol=_ATOL_FLOOR, what="psi representation")
        return total / math.pi

    def _map(self, fn, *arrays):
        arrays = np.broadcast_arrays(*(_as_float(a) for a in arrays))
        out = np.vectorize(fn, otypes=[float])(*arrays)
        return out

    def psi(self, x):
        return self._map(
            lambda x: self.c * x + self._integral(lambda z: x / (z * (x + z)), [x]), x
        )

    def d1(self, x):
        return self._map(lambda x: self.c + self._integral(lambda z: 1.0 / (x + z) ** 2, [x]), x)

    def d2(self, x):
        return self._map(lambda x: -2.0 * self._integral(lambda z: 1.0 / (x + z) ** 3, [x]), x)

    def d3(self, x):
        return self._map(lambda x: 6.0 * self._integral(lambda z: 1.0 / (x + z) ** 4, [x]), x)

    def secant(self, x, y):
        return self._map(
            lambda x, y: self.c + self._integral(lambda z: 1.0 / ((x + z) * (y + z)), [x, y]), x, y
        )

    def secant_d1(self, x, y):
        def one(x, y):
            return -self._integral(
                lambda z: (x + y + 2.0 * z) / ((x + z) ** 2 * (y + z) ** 2), [x, y]
            )

        return self._map(one, x, y)

    def psi_rest(self, x):
        return self.psi(x) - self.c * _as_float(x)

    def psi_complex(self, w):
        def kernel(w, z):
            # w / (z (w + z)) without overflow for very large |w| or z
            return 1.0 / (z * (1.0 + z / w)) if abs(w) >= z else (w / z) / (w + z)

        def one(w):
            br = [abs(w)]
            re = self._integral(lambda z: kernel(w, z).real, br)
            im = self._integral(lambda z: kernel(w, z).imag, br)
            return self.c * w + complex(re, im)

        return np.vectorize(one, otypes=[complex])(np.asarray(w, dtype=complex))

    def _boundary_one(self, s):
        if s == self._start and s > 0:
            raise BranchPointError(f"boundary value requested at the support edge s = {s}")
        # Re psi(-s + i0) = -c s - (s/pi) PV int m(z) / (z (z - s)) dz
        lo_win = max(0.5 * s, self._start)
        hi_win = 2.0 * s
        pv = 0.0
        if lo_win < hi_win and s > self._start:
            # Cauchy-weighted window around the pole
            pv += quadrature.quad(
                lambda z: float(self._m(z)) / z, lo_win, hi_win, weight="cauchy", wvar=s,
                rtol=self.rtol, atol=_ATOL_FLOOR, what="principal value",
            )
            left, right = lo_win, hi_win
        else:
            left = right = max(hi_win, self._start)
            if s < self._start:
                left = right = self._start

        def regular(u):
            if abs(u) > 700.0:
                return 0.0
            z = math.exp(u)
            return float(self._m(z)) / (z - s)

        if left > self._start or (self._start == 0 and left > 0):
            a = math.log(self._start) if self._start > 0 else -math.inf
            if a < math.log(left):
                pv += quadrature.quad(regular, a, math.log(left), rtol=self.rtol, atol=_ATOL_FLOOR)
        pv += quadrature.quad(regular, math.log(right), math.inf, rtol=self.rtol, atol=_ATOL_FLOOR)
        u = -self.c * s - s * pv / math.pi
        v = float(self._m(s)) if s != self._start else 0.0
        return u, v

    def boundary(self, s):
        s = _as_float(s)
        flat = [self._boundary_one(float(v)) for v in s.ravel()]
        u = np.array([f[0] for f in flat]).reshape(s.shape)
        v = np.array([f[1] for f in flat]).reshape(s.shape)
        return u, v

    def density(self, s):
        return np.asarray(self._m(_as_float(s)), dtype=float)

    def label(self):
        return f"measure_defined({self.density_name},c={self.c:g})"

    def to_mapping(self):
        return {"family": self.family, "density": self.density_name, "c": self.c}


# -- operations --------------------------------------------------------------


def _positive(value, name):
    arr = _as_float(value)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"{name} must be positive, got {value!r}")
    return arr


def evaluate(spec: BernsteinSpec, xi):
    """``psi(xi)`` for ``xi > 0``."""
    x = _positive(xi, "xi")
    if isinstance(spec, MeasureDefined):
        return _scalar_or_array(spec.psi(x), xi)
    return _scalar_or_array(spec.psi(x), xi)


def deriv(spec: BernsteinSpec, xi, order: int = 1):
    """Derivative of ``psi`` of order 1, 2 or 3."""
    x = _positive(xi, "xi")
    hooks = {1: spec.d1, 2: spec.d2, 3: spec.d3}
    if order not in hooks:
        raise DomainError(f"order must be 1, 2 or 3, got {order}")
    return _scalar_or_array(hooks[order](x), xi)


def boundary_values(spec: BernsteinSpec, s):
    """``(u, v)`` with ``psi(-s + i0) = u + i v``; ``v = m(s) >= 0``."""
    x = _positive(s, "s")
    u, v = spec.boundary(x)
    return _scalar_or_array(u, s), _scalar_or_array(v, s)


def pq(spec: BernsteinSpec, mu):
    """The ratios ``P = x psi'(x) / psi(x)`` and ``Q = -x psi''(x) / (2 psi'(x))`` at ``x = mu**2``."""
    m = _positive(mu, "mu")
    x = m * m
    d1 = spec.d1(x)
    P = x * d1 / spec.psi(x)
    Q = -x * spec.d2(x) / (2.0 * d1)
    return _scalar_or_array(P, mu), _scalar_or_array(Q, mu)


@dataclass(frozen=True)
class GrowthDiagnostic:
    passes: bool
    values: list


def moderate_growth_probe(spec: BernsteinSpec, xi_grid=None) -> GrowthDiagnostic:
    """Heuristic check of ``x psi'(x) -> inf``.

    Evaluates ``x psi'(x)`` on a geometric grid (default ``[1, 1e12]``) and
    passes when the last value exceeds ten times the first and the last few
    values increase.  A finite grid cannot prove a limit; treat the answer as
    a warning light only.
    """
    grid = np.geomspace(1.0, 1e12, 49) if xi_grid is None else _positive(xi_grid, "xi_grid")
    if np.log10(grid.max() / grid.min()) < 6.0:
        raise DomainError("moderate growth probe needs a grid spanning at least 6 decades")
    values = grid * spec.d1(grid)
    tail = values[-4:]
    passes = bool(values[-1] > 10.0 * values[0] and np.all(np.diff(tail) > 0))
    return GrowthDiagnostic(passes=passes, values=[float(v) for v in values])


@dataclass(frozen=True)
class LevyTail:
    """Levy density ``nu`` with the integrals ``nu0(x) = c + int_0^x z^2 nu``
    and ``nu_inf(x) = int_x^inf nu``."""

    nu: Callable
    nu0: Callable
    nu_inf: Callable


def _generic_levy(spec: BernsteinSpec) -> LevyTail:
    # nu(z) = (1/pi) int_0^inf exp(-z t) m(t^2) dt after zeta = t^2
    start = math.sqrt(spec.cut_start)

    def m2(t):
        return float(spec.density(t * t))

    def integrate_t(kernel):
        lo = start
        total = 0.0
        if lo == 0.0:
            total += quadrature.quad(lambda t: kernel(t) * m2(t), 0.0, 1.0, rtol=1e-10, atol=1e-300)
            lo = 1.0
        total += quadrature.quad(lambda t: kernel(t) * m2(t), lo, math.inf, rtol=1e-10, atol=1e-300)
        return total / math.pi

    def nu(z):
        return np.vectorize(lambda z: integrate_t(lambda t: math.exp(-abs(z) * t)), otypes=[float])(z)

    def inner(x, t):
        # int_0^x z^2 exp(-z t) dz
        xt = x * t
        if xt < 1e-3:
            return x**3 * (1.0 / 3.0 - xt / 4.0 + xt * xt / 10.0)
        return (2.0 - math.exp(-xt) * (xt * xt + 2.0 * xt + 2.0)) / t**3

    def nu0(x):
        return np.vectorize(lambda x: spec.drift + integrate_t(lambda t: inner(x, t)), otypes=[float])(x)

    def nu_inf(x):
        return np.vectorize(lambda x: integrate_t(lambda t: math.exp(-x * t) / t), otypes=[float])(x)

    return LevyTail(nu=nu, nu0=nu0, nu_inf=nu_inf)


def levy_tail(spec: BernsteinSpec, *, closed_form: bool = True) -> LevyTail:
    """Levy density and its truncated moments.

    Power-type families use ``nu(z) = C z**(-1-alpha)`` with
    ``C = Gamma(1+alpha) sin(pi alpha/2) / pi``; Klein-Gordon uses
    ``K_1(z) / (pi z)``.  Other families (and ``closed_form=False``) go
    through the subordination integral over ``m``.
    """
    if not closed_form:
        return _generic_levy(spec)
    if isinstance(spec, (Power, SumOfPowers)):
        parts = spec._parts if isinstance(spec, SumOfPowers) else (spec,)

        def nu(z):
            return sum(p.nu_closed(z) for p in parts)

        def nu0(x):
            x = _as_float(x)
            total = spec.drift + np.zeros(x.shape)
            for p in parts:
                if p.alpha < 2.0:
                    total = total + p.levy_constant() * x ** (2.0 - p.alpha) / (2.0 - p.alpha)
            return total

        def nu_inf(x):
            x = _as_float(x)
            total = np.zeros(x.shape)
            for p in parts:
                if p.alpha < 2.0:
                    total = total + p.levy_constant() * x ** (-p.alpha) / p.alpha
            return total

        return LevyTail(nu=nu, nu0=nu0, nu_inf=nu_inf)
    if isinstance(spec, KleinGordon):

        def nu0(x):
            return np.vectorize(
                lambda x: quadrature.quad(lambda z: z * special.k1(z) / math.pi, 0.0, x, rtol=1e-11),
                otypes=[float],
            )(x)

        def nu_inf(x):
            return np.vectorize(
                lambda x: quadrature.quad(
                    lambda z: special.k1(z) / (math.pi * z), x, math.inf, rtol=1e-11, atol=1e-300
                ),
                otypes=[float],
            )(x)

        return LevyTail(nu=spec.nu_closed, nu0=nu0, nu_inf=nu_inf)
    if isinstance(spec, (Log1p, MeasureDefined)):
        raise UnsupportedFamilyError(
            f"no closed-form Levy density for {spec.label()}; use closed_form=False"
        )
    raise UnsupportedFamilyError(f"unknown family {spec!r}")


# -- parsing -----------------------------------------------------------------

_FAMILIES = ("power", "sum_of_powers", "klein_gordon", "log1p", "measure_defined")


def spec_from_mapping(mapping: dict) -> BernsteinSpec:
    """Build a spec from ``{family = ..., alpha = ..., ...}``."""
    try:
        family = mapping["family"]
    except (KeyError, TypeError):
        raise ConfigError("psi section needs a 'family' key") from None
    try:
        if family == "power":
            return Power(float(mapping["alpha"]))
        if family == "sum_of_powers":
            return SumOfPowers(float(mapping["alpha"]), float(mapping["beta"]))
        if family == "klein_gordon":
            return KleinGordon()
        if family == "log1p":
            return Log1p()
        if family == "measure_defined":
            return MeasureDefined(str(mapping.get("density", "log")), float(mapping.get("c", 0.0)))
    except KeyError as exc:
        raise ConfigError(f"family {family!r} is missing parameter {exc.args[0]!r}") from None
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    raise ConfigError(f"unknown family {family!r}; expected one of {', '.join(_FAMILIES)}")


def parse_psi(text: str) -> BernsteinSpec:
    """Parse ``family:params``, e.g. ``power:1``, ``sum_of_powers:1,0.5``,
    ``klein_gordon``, ``measure_defined:log`` or ``measure_defined:log,0.5``."""
    family, _, params = text.strip().partition(":")
    args = [p.strip() for p in params.split(",") if p.strip()] if params else []
    try:
        if family == "power" and len(args) == 1:
            return spec_from_mapping({"family": family, "alpha": args[0]})
        if family == "sum_of_powers" and len(args) == 2:
            return spec_from_mapping({"family": family, "alpha": args[0], "beta": args[1]})
        if family in ("klein_gordon", "log1p") and not args:
            return spec_from_mapping({"family": family})
        if family == "measure_defined" and 1 <= len(args) <= 2:
            return spec_from_mapping(
                {"family": family, "density": args[0], "c": args[1] if len(args) > 1 else 0.0}
            )
    except ValueError as exc:
        raise ConfigError(f"cannot parse psi {text!r}: {exc}") from None
    raise ConfigError(f"cannot parse psi {text!r}")
