"""Generalised eigenfunctions of ``psi(-d^2/dx^2)`` on the half-line.

For ``mu > 0`` the eigenfunction with eigenvalue ``psi(mu^2)`` is

    F_mu(x) = sin(mu x + theta_mu) - G_mu(x),     G_mu(x) = int exp(-x xi) gamma_mu(xi) d xi

with a nonnegative density ``gamma_mu``.  Everything here is driven by one
auxiliary function of ``r > 0``,

    ell(r) = log psi'(mu^2) - log S(r^2, mu^2),        S = divided difference of psi,

and its Poisson-type average ``E(xi) = (1/pi) int_0^inf xi / (xi^2 + r^2) ell(r) dr``:

    Laplace F_mu(xi) = mu / (mu^2 + xi^2) * exp(E(xi))
    gamma_mu(xi)     = (1/pi) mu psi'(mu^2) v / ((psi(mu^2) - u)^2 + v^2) * exp(-E(xi))

where ``u + i v = psi(-xi^2 + i0)``.

Numerics.  With ``r = exp(s)`` the kernel becomes ``1 / (2 cosh(s - log xi))``
and ``ell(exp(s))`` is analytic in the strip ``|Im s| < pi/2`` (``psi`` is
holomorphic off the negative axis and ``S`` has no zeros there).  The
trapezoidal rule in ``s`` therefore converges geometrically, and a step of
0.2 already sits far below double precision.  Integrals against
``gamma_mu`` use composite Gauss-Legendre panels in ``log xi`` with
geometric refinement towards the start of the cut and around resonances
``u(xi^2) = psi(mu^2)``, plus power-law tails past both ends of the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import optimize, special

from . import quadrature
from .cbf import BernsteinSpec
from .errors import DomainError, NumericError, PoleError, UnsupportedFamilyError
from .theta import theta as theta_of

__all__ = [
    "HalfLine",
    "GammaDensity",
    "EigenfunctionF",
    "halfline",
    "gamma_density",
    "exp_factor",
    "G",
    "G_deriv",
    "I",
    "I_by_x_quadrature",
    "closed_form_I",
    "laplace_F",
    "eigenfunction",
    "G_upper_bound",
    "laplace_F_bound",
]

_STEP = 0.2  # trapezoid step in s = log r
_S_LO, _S_HI = -100.0, 105.0  # s-range relative to log mu
_XI_LO, _XI_HI = -45.0, 50.0  # gamma grid range in log(xi / mu)
_PANEL = 0.25
_ORDER = 8
_CHUNK = 256


def _half_sech(d):
    """``1 / (2 cosh d)`` without overflow, for real or complex ``d``."""
    d = np.where(np.real(d) < 0, -d, d)
    e = np.exp(-d)
    return e / (1.0 + e * e)


def _exp_integral(n: float, z: float) -> float:
    """Generalised exponential integral ``E_n(z) = int_1^inf exp(-z t) t^(-n) dt``."""
    if z > 700.0:
        return 0.0
    return quadrature.quad(
        lambda u: math.exp(-z * math.exp(u) + (1.0 - n) * u), 0.0, math.log(750.0 / z) + 1.0,
        rtol=1e-11, atol=1e-300, what="tail of the gamma Laplace integral",
    )


@dataclass
class HalfLine:
    """Evaluator for one ``(spec, mu)``; build it through :func:`halfline`."""

    spec: BernsteinSpec
    mu: float
    theta: float = field(init=False)
    psi0: float = field(init=False)
    d10: float = field(init=False)

    def __post_init__(self):
        spec, mu = self.spec, self.mu
        if spec.bounded:
            # gamma may then carry atoms, which the density representation cannot hold
            raise UnsupportedFamilyError(f"{spec.label()} is bounded; only unbounded psi is supported")
        x0 = mu * mu
        self.psi0 = float(spec.psi(x0))
        self.d10 = float(spec.d1(x0))
        self.theta = theta_of(spec, mu)
        lm = math.log(mu)
        self._s = lm + np.arange(_S_LO, _S_HI + _STEP / 2, _STEP)
        r2 = np.exp(2.0 * self._s)
        self._ell = math.log(self.d10) - np.log(spec.secant(r2, x0))
        if not np.all(np.isfinite(self._ell)):
            raise NumericError("log-ratio on the r-grid is not finite", mu=mu, spec=spec.label())
        self._build_gamma_grid()

    # -- E and the exponential factor -----------------------------------
    def E(self, xi):
        """``(1/pi) int_0^inf xi / (xi^2 + r^2) ell(r) dr`` for ``Re xi > 0``."""
        xi = np.asarray(xi)
        flat = xi.ravel()
        if np.any(np.real(flat) <= 0):
            raise DomainError("E requires Re xi > 0")
        sigma = np.log(flat.astype(complex) if np.iscomplexobj(flat) else flat.astype(float))
        rel = np.real(sigma) - math.log(self.mu)
        if np.any(rel < _S_LO + 40) or np.any(rel > _S_HI - 40):
            raise DomainError("xi / mu outside the supported range", mu=self.mu)
        out = np.empty(flat.shape, dtype=sigma.dtype)
        # the kernel has poles at sigma +- i pi/2; for |arg xi| > pi/4 the
        # trapezoid runs on the line Im s = +-pi/4 so they stay pi/4 away
        phase = np.imag(sigma)
        for shift in (-1, 0, 1):
            sel = np.nonzero(np.where(np.abs(phase) > math.pi / 4, np.sign(phase), 0) == shift)[0]
            if sel.size == 0:
                continue
            line, ell = self._line(shift)
            for start in range(0, sel.size, _CHUNK):
                idx = sel[start:start + _CHUNK]
                out[idx] = _half_sech(line[None, :] - sigma[idx, None]) @ ell
        out *= _STEP / math.pi
        return out.reshape(xi.shape) if xi.ndim else out.reshape(()).item()

    def _line(self, shift: int):
        """Nodes ``s + i shift pi/4`` and the log-ratio there (``shift`` in -1, 0, 1)."""
        if shift == 0:
            return self._s, self._ell
        cache = self.__dict__.setdefault("_lines", {})
        if shift not in cache:
            line = self._s + 1j * shift * math.pi / 4
            w = np.exp(2.0 * line)
            x0 = self.mu * self.mu
            S = (np.asarray(self.spec.psi_complex(w), dtype=complex) - self.psi0) / (w - x0)
            ell = math.log(self.d10) - np.log(S)
            if not np.all(np.isfinite(ell)):
                raise NumericError("log-ratio on the shifted line is not finite", mu=self.mu)
            cache[shift] = (line, ell)
        return cache[shift]

    def exp_factor(self, xi):
        return np.exp(-np.asarray(self.E(xi)))

    # -- gamma -----------------------------------------------------------
    def _prefactor(self, xi):
        """``(1/pi) mu psi'(mu^2) v / ((psi(mu^2) - u)^2 + v^2)`` at ``xi^2``."""
        xi = np.asarray(xi, dtype=float)
        s = xi * xi
        out = np.zeros(s.shape)
        live = s > self.spec.cut_start
        if np.any(live):
            u, v = self.spec.boundary(s[live])
            u = np.asarray(u, dtype=float)
            v = np.asarray(v, dtype=float)
            with np.errstate(invalid="ignore", divide="ignore"):
                val = self.mu * self.d10 * v / ((self.psi0 - u) ** 2 + v * v) / math.pi
            out[live] = np.where(v > 0, val, 0.0)
        return out

    def density(self, xi):
        xi = np.asarray(xi, dtype=float)
        if np.any(xi <= 0):
            raise DomainError("xi must be positive")
        pre = self._prefactor(xi)
        out = np.zeros(xi.shape)
        live = pre > 0
        if np.any(live):
            out[live] = pre[live] * np.exp(-np.asarray(self.E(xi[live])))
        return out

    def _resonances(self, lo, hi):
        """Solutions of ``u(xi^2) = psi(mu^2)`` on the cut, located by bisection."""
        grid = np.exp(np.linspace(math.log(lo), math.log(hi), 400))
        grid = grid[grid * grid > self.spec.cut_start * (1 + 1e-12)]
        if grid.size < 2:
            return []
        u, v = self.spec.boundary(grid * grid)
        f = np.asarray(u, dtype=float) - self.psi0
        roots = []
        for i in np.nonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)[0]:
            g = lambda t: float(self.spec.boundary(t * t)[0]) - self.psi0  # noqa: E731
            roots.append(optimize.brentq(g, grid[i], grid[i + 1], xtol=1e-14 * grid[i]))
        return roots

    def _build_gamma_grid(self):
        mu = self.mu
        lo = mu * math.exp(_XI_LO)
        hi = mu * math.exp(_XI_HI)
        xc = math.sqrt(self.spec.cut_start)
        self.lower_tail = xc < lo
        edges = []
        if xc >= hi or (self.spec.family == "power" and getattr(self.spec, "alpha", 0) == 2.0):
            self._nodes = np.zeros(0)
            self._weights = np.zeros(0)
            self._gamma = np.zeros(0)
            self._upper = self._lower = None
            return
        if xc >= lo:
            lo = 2.0 * xc
            edges.extend(xc * (1.0 + 2.0 ** -np.arange(60, 0, -1)))
        n_panels = max(1, int(math.ceil(math.log(hi / lo) / _PANEL)))
        edges.extend(np.exp(np.linspace(math.log(lo), math.log(hi), n_panels + 1)))
        for root in self._resonances(edges[0], hi):
            k = np.arange(1, 11)
            edges.extend(root * (1.0 - 2.0**-k))
            edges.extend(root * (1.0 + 2.0**-k))
            edges.append(root)
        edges = np.unique(np.asarray(edges))
        if xc > 0:
            edges = np.concatenate(([xc], edges[edges > xc]))
        t, w, _ = quadrature.composite_gauss(np.log(edges), _ORDER)
        nodes = np.exp(t)
        self._nodes = nodes
        self._weights = w * nodes
        self._gamma = self.density(nodes)
        self._fit_tails()

    def _fit_tails(self):
        xi, g = self._nodes, self._gamma
        self._upper = None
        self._lower = None
        i1, i0 = len(xi) - 1, len(xi) - _ORDER
        if g[i1] > 0 and g[i0] > 0:
            p = -math.log(g[i1] / g[i0]) / math.log(xi[i1] / xi[i0])
            self._upper = (g[i1] * xi[i1] ** p, p, float(np.exp(math.log(xi[i1]) + 0.5 * _PANEL / _ORDER)))
        if self.lower_tail and g[0] > 0 and g[_ORDER - 1] > 0:
            q = math.log(g[_ORDER - 1] / g[0]) / math.log(xi[_ORDER - 1] / xi[0])
            if q <= -1:
                raise NumericError("gamma density is not integrable at 0", exponent=q)
            self._lower = (g[0] / xi[0] ** q, q, float(self._edges_lo()))

    def _edges_lo(self):
        return self.mu * math.exp(_XI_LO)

    # -- moments ---------------------------------------------------------
    def moment(self, x, k: int):
        """``int xi^k exp(-x xi) gamma(xi) d xi`` for ``x >= 0``."""
        x = np.asarray(x, dtype=float)
        if np.any(x < 0):
            raise DomainError("x must be nonnegative")
        if self._nodes.size == 0:
            return np.zeros(x.shape) if x.ndim else 0.0
        flat = x.ravel()
        base = self._weights * self._gamma * self._nodes**k
        out = np.empty(flat.shape)
        for start in range(0, flat.size, _CHUNK):
            sl = slice(start, start + _CHUNK)
            out[sl] = np.exp(-np.outer(flat[sl], self._nodes)) @ base
        out += np.array([self._tails(xv, k) for xv in flat])
        return out.reshape(x.shape) if x.ndim else float(out[0])

    def _tails(self, x, k):
        total = 0.0
        if self._upper is not None:
            C, p, X = self._upper
            n = p - k
            if x == 0.0:
                if n <= 1.0:
                    raise NumericError("moment diverges at x = 0", order=k, tail_exponent=p)
                total += C * X ** (1.0 - n) / (n - 1.0)
            elif x * X < 700.0:
                total += C * X ** (1.0 - n) * _exp_integral(n, x * X)
        if self._lower is not None:
            C, q, X = self._lower
            a = k + q + 1.0
            if a <= 0:
                raise NumericError("moment diverges at xi = 0", order=k, exponent=q)
            if x * X < 1e-8:
                total += C * X**a / a
            else:
                total += C * x**-a * special.gamma(a) * special.gammainc(a, x * X)
        return total

    def total_mass(self) -> float:
        return float(self.moment(0.0, 0))

    def G(self, x):
        return self.moment(x, 0)

    def G_deriv(self, x, order: int):
        if order == 1:
            return -np.asarray(self.moment(x, 1)) if np.ndim(x) else -self.moment(x, 1)
        if order == 2:
            return self.moment(x, 2)
        raise DomainError("order must be 1 or 2")

    def I(self) -> float:
        """``int_0^inf G(x) dx`` evaluated as ``int gamma(xi) / xi d xi``."""
        return float(self.moment(0.0, -1))

    def I_by_x_quadrature(self) -> float:
        """``int_0^inf G(x) dx`` by quadrature in ``x`` (no interchange of integrals)."""
        if self._nodes.size == 0:
            return 0.0
        lo, hi = math.exp(-48.0) / self.mu, math.exp(48.0) / self.mu
        n_panels = int(math.ceil(math.log(hi / lo) / _PANEL))
        t, w, _ = quadrature.composite_gauss(np.linspace(math.log(lo), math.log(hi), n_panels + 1), _ORDER)
        xs = np.exp(t)
        gx = np.asarray(self.G(xs))
        head = float(np.sum(w * xs * gx))
        head += lo * float(self.G(0.5 * lo))  # G is nearly flat below lo
        # far tail: G decays like a power of x there
        if gx[-1] > 0 and gx[-_ORDER] > 0:
            r = -math.log(gx[-1] / gx[-_ORDER]) / (t[-1] - t[-_ORDER])
            if r > 1:
                head += gx[-1] * xs[-1] / (r - 1.0)
        return head

    def laplace_F(self, xi):
        xi = np.asarray(xi, dtype=complex) if np.iscomplexobj(xi) else np.asarray(xi, dtype=float)
        if np.any(np.abs(self.mu**2 + xi * xi) < 1e-12):
            raise PoleError("Laplace transform of F requested at its pole xi = +-i mu")
        val = self.mu / (self.mu**2 + xi * xi) * np.exp(self.E(xi))
        return val if np.ndim(val) else val.item()

    def F(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        pos = x > 0
        if np.any(pos):
            out[pos] = np.sin(self.mu * x[pos] + self.theta) - np.asarray(self.G(x[pos]))
        return out if x.ndim else float(out)


@lru_cache(maxsize=64)
def halfline(spec: BernsteinSpec, mu: float) -> HalfLine:
    """Cached evaluator for ``(spec, mu)``."""
    mu = float(mu)
    if not (mu > 0 and math.isfinite(mu)):
        raise DomainError(f"mu must be positive, got {mu}")
    return HalfLine(spec, mu)


@dataclass(frozen=True)
class GammaDensity:
    """Density of ``gamma_mu`` and its exponential factor as callables."""

    mu: float
    density: object
    exp_factor: object


@dataclass(frozen=True)
class EigenfunctionF:
    """``F(x) = sin(mu x + theta) - G(x)`` on ``x > 0`` and 0 elsewhere."""

    mu: float
    theta: float
    G: object
    F: object


def gamma_density_object(spec: BernsteinSpec, mu: float) -> GammaDensity:
    h = halfline(spec, mu)
    return GammaDensity(mu=h.mu, density=h.density, exp_factor=h.exp_factor)


def eigenfunction(spec: BernsteinSpec, mu: float) -> EigenfunctionF:
    h = halfline(spec, mu)
    return EigenfunctionF(mu=h.mu, theta=h.theta, G=h.G, F=h.F)


def _unwrap(value, like):
    return float(value) if np.ndim(like) == 0 else value


def gamma_density(spec: BernsteinSpec, mu: float, xi):
    """Density of ``gamma_mu`` at ``xi > 0``; zero wherever ``Im psi(-xi^2 + i0) = 0``."""
    return _unwrap(halfline(spec, mu).density(np.asarray(xi, dtype=float)), xi)


def exp_factor(spec: BernsteinSpec, mu: float, xi):
    return _unwrap(halfline(spec, mu).exp_factor(np.asarray(xi, dtype=float)), xi)


def G(spec: BernsteinSpec, mu: float, x):
    """``G_mu(x)``; at ``x = 0`` this is the total mass ``sin(theta_mu)``."""
    return halfline(spec, mu).G(x)


def G_deriv(spec: BernsteinSpec, mu: float, x, order: int = 1):
    return halfline(spec, mu).G_deriv(x, order)


def I(spec: BernsteinSpec, mu: float) -> float:  # noqa: E743
    return halfline(spec, mu).I()


def I_by_x_quadrature(spec: BernsteinSpec, mu: float) -> float:
    return halfline(spec, mu).I_by_x_quadrature()


def closed_form_I(spec: BernsteinSpec, mu: float) -> float:
    """``cos(theta_mu) / mu - sqrt(psi'(mu^2) / psi(mu^2))``."""
    x0 = mu * mu
    return math.cos(theta_of(spec, mu)) / mu - math.sqrt(float(spec.d1(x0)) / float(spec.psi(x0)))


def laplace_F(spec: BernsteinSpec, mu: float, xi):
    """``int_0^inf F_mu(x) exp(-xi x) dx`` for ``Re xi > 0``."""
    return halfline(spec, mu).laplace_F(xi)


def G_upper_bound(spec: BernsteinSpec, mu: float, x):
    """Upper bound for ``G_mu(x)`` in terms of ``psi`` alone (valid for ``mu x != 1``).

    ``G_mu(x) <= (psi_mu(1/x^2) - 1) / (mu x sqrt(psi_mu(mu^2)))``. The
    integral term of a complete Bernstein function carries ``1/pi``, so no
    further ``1/pi`` appears here; the smaller constant fails numerically.
    """
    x = np.asarray(x, dtype=float)
    x0 = mu * mu
    psi0 = float(spec.psi(x0))
    P = x0 * float(spec.d1(x0)) / psi0
    # psi_mu(w) = psi(mu^2) / (mu^2 S(w, mu^2)); psi_mu(mu^2) = 1 / P
    psi_mu = psi0 / (x0 * spec.secant(1.0 / (x * x), x0))
    return _unwrap((psi_mu - 1.0) * math.sqrt(P) / (mu * x), x)


def laplace_F_bound(spec: BernsteinSpec, mu: float, xi):
    """Upper bound for ``|Laplace F_mu(xi)|`` when ``Re xi > 0``."""
    xi = np.asarray(xi)
    x0 = mu * mu
    m2 = np.abs(xi) ** 2
    ratio = float(spec.d1(x0)) / spec.secant(m2, x0)
    return _unwrap(2.0 * math.sqrt(2.0) * mu / np.abs(x0 + xi * xi) * np.sqrt(ratio), xi)
