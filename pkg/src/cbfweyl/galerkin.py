"""Rayleigh-Ritz oracle for the eigenvalues of ``psi(-d^2/dx^2)`` on ``(-a, a)``.

The quadratic form ``E(f, g) = (1/2pi) int psi(xi^2) Ff(xi) conj(Fg(xi)) d xi``
is discretised in the sine basis

    e_j(x) = a^(-1/2) sin(j pi (x + a) / (2a)),   j = 1..N,

extended by zero outside the interval.  With ``kappa_j = j pi / 2`` and
``t = xi a`` every entry reduces to integrals of ``psi(t^2/a^2) Tr(t)``
against rational kernels, where ``Tr = cos^2`` for odd ``j`` and ``sin^2``
for even ``j`` (entries with ``j + k`` odd vanish by parity).  Partial
fractions give

    M_jk = (4 kappa_j kappa_k / pi) (H(kappa_j) - H(kappa_k)) / (kappa_k^2 - kappa_j^2),
    M_jj = (4 kappa_j^2 / pi) K(kappa_j),

    H(kappa) = int psi Tr / (kappa^2 - t^2) dt   (up to a kappa-independent constant)
    K(kappa) = int psi Tr / (kappa^2 - t^2)^2 dt,

so the assembly needs ``O(N)`` integrals rather than ``O(N^2)``.  Each
integral is split at ``T = 2 N pi``: composite Gauss-Legendre on ``[0, T]``
with one panel per quarter period, and on ``[T, inf)`` a geometric series in
``kappa^2 / t^2`` whose coefficients are computed once by adaptive
quadrature.  A linear part ``c xi`` of ``psi`` contributes ``c k_j^2`` on the
diagonal and is added exactly.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import linalg

from . import quadrature
from .cbf import BernsteinSpec
from .errors import ConfigError, DomainError, InternalInconsistencyError, NumericError

__all__ = [
    "basis_transform",
    "basis_function",
    "FormMatrix",
    "form_matrix",
    "eigensolve",
    "RitzSpectrum",
    "spectrum",
    "ritz_values",
    "TraceCheck",
    "trace_check",
    "CompareRow",
    "compare",
    "ShapeRow",
    "shape_distances",
    "richardson",
    "Extrapolation",
    "extrapolate",
    "write_matrix",
    "read_matrix",
]

_ORDER = 10
_SERIES_TERMS = 16
_CHUNK = 32
MAGIC = b"PSIDELTA"


# -- basis --------------------------------------------------------------------


def basis_transform(a: float, j: int, xi):
    """Fourier transform ``int e_j(x) exp(-i xi x) dx`` of the ``j``-th basis function."""
    if j < 1 or int(j) != j:
        raise DomainError(f"basis index must be a positive integer, got {j}")
    xi = np.asarray(xi, dtype=float)
    k = j * math.pi / (2 * a)
    eps = np.abs(xi) - k
    # sin(eps a) / eps written through sinc so that eps = 0 is harmless
    ratio = a * np.sinc(eps * a / math.pi) / (2 * k + eps)
    scale = 2 * k / math.sqrt(a)
    if j % 2 == 1:
        sign = 1.0 if (j // 2) % 2 == 0 else -1.0
        val = (scale * sign * ratio).astype(complex)
    else:
        sign = 1.0 if (j // 2) % 2 == 0 else -1.0
        val = -1j * scale * sign * ratio
        val = np.where(xi < 0, np.conj(val), val)
    return val if val.ndim else complex(val)


def basis_function(a: float, j, x):
    """``e_j(x)``; zero outside ``(-a, a)``.  ``j`` may be an array."""
    x = np.asarray(x, dtype=float)
    j = np.asarray(j)
    val = np.sin(np.multiply.outer(j, x + a) * (math.pi / (2 * a))) / math.sqrt(a)
    return np.where(np.abs(x) < a, val, 0.0)


# -- quadrature nodes -----------------------------------------------------------


@lru_cache(maxsize=8)
def _head_rule(n_panels: int):
    """Nodes on ``[0, n_panels pi/2]``: quarter-period panels, the first one graded.

    Returns ``(t, w, cos2, sin2)`` with ``cos2 = cos(t)^2`` and ``sin2 = sin(t)^2``
    evaluated from the panel parity so they stay exact near the zeros.
    """
    x, w = quadrature._legendre(_ORDER)
    half = math.pi / 4
    s_main = half * (x + 1.0)
    w_main = half * w
    m = np.arange(1, n_panels)
    t_main = (m[:, None] * (math.pi / 2) + s_main[None, :]).ravel()
    w_all = np.tile(w_main, n_panels - 1)
    s_all = np.tile(s_main, n_panels - 1)
    odd_panel = np.repeat(m % 2 == 1, _ORDER)
    cos2 = np.where(odd_panel, np.sin(s_all) ** 2, np.cos(s_all) ** 2)
    sin2 = np.where(odd_panel, np.cos(s_all) ** 2, np.sin(s_all) ** 2)
    # first panel [0, pi/2], graded towards 0 where psi may be singular
    edges = quadrature.graded_edges(0.0, math.pi / 2, levels=40)
    t0, w0, _ = quadrature.composite_gauss(edges, _ORDER)
    t = np.concatenate((t0, t_main))
    w = np.concatenate((w0, w_all))
    c = np.concatenate((np.cos(t0) ** 2, cos2))
    s = np.concatenate((np.sin(t0) ** 2, sin2))
    for arr in (t, w, c, s):
        arr.setflags(write=False)
    return t, w, c, s


def _tail_coefficients(psi_r, psi_c, T: float, terms: int):
    """``(A_p, B_p)`` for ``p = 1..terms``:
    ``A_p = int_T^inf psi_r t^(-2p-2) dt`` and ``B_p = int_T^inf psi_r t^(-2p-2) cos(2t) dt``.

    ``T`` is a multiple of ``pi``, so rotating ``B_p`` onto ``t = T + iy`` gives
    ``B_p = -int_0^inf Im[psi_c(T + iy) (T + iy)^(-2p-2)] exp(-2y) dy`` with no
    oscillation left; ``psi_c`` is the analytic continuation of ``psi_r``.
    """
    pT = float(psi_r(T))
    A = np.zeros(terms + 1)
    B = np.zeros(terms + 1)
    if pT == 0.0:
        return A, B
    for p in range(1, terms + 1):
        # t = T u, normalised by psi_r(T) T^(-2p-1)
        def g(u, p=p):
            return float(psi_r(T * u)) / pT * u ** (-2.0 * p - 2.0)

        def h(y, p=p):
            u = 1.0 + 1j * y / T
            return -(complex(psi_c(T * u)) / pT * u ** (-2.0 * p - 2.0)).imag * math.exp(-2.0 * y)

        a_val = quadrature.quad(g, 1.0, math.inf, rtol=1e-12, atol=1e-15, what="series coefficient")
        b_val = quadrature.quad(h, 0.0, math.inf, rtol=1e-10, atol=1e-15 / T, what="rotated series coefficient")
        scale = pT * T ** (-2.0 * p - 1.0)
        A[p] = a_val * scale
        B[p] = b_val * scale / T
    return A, B


# -- form matrix ----------------------------------------------------------------


@dataclass(frozen=True)
class FormMatrix:
    """Parity blocks of the Galerkin matrix.

    ``even`` holds indices ``j = 1, 3, 5, ...`` (even functions), ``odd``
    holds ``j = 2, 4, 6, ...``.
    """

    a: float
    N: int
    even: np.ndarray
    odd: np.ndarray

    def full(self) -> np.ndarray:
        M = np.zeros((self.N, self.N))
        M[0::2, 0::2] = self.even
        M[1::2, 1::2] = self.odd
        return M


def _block(kappa, H, K):
    kk = kappa[:, None] * kappa[None, :]
    d2 = kappa[None, :] ** 2 - kappa[:, None] ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        M = 4.0 * kk / math.pi * (H[:, None] - H[None, :]) / d2
    idx = np.arange(len(kappa))
    M[idx, idx] = 4.0 * kappa**2 / math.pi * K
    return 0.5 * (M + M.T)


def _hk(kappa, t, f, A, B, tr_sign):
    """``H`` and ``K`` at every ``kappa`` for integrand weights ``f``."""
    H = np.empty(len(kappa))
    K = np.empty(len(kappa))
    for start in range(0, len(kappa), _CHUNK):
        kc = kappa[start:start + _CHUNK]
        R = 1.0 / ((kc[:, None] - t[None, :]) * (kc[:, None] + t[None, :]))
        H[start:start + _CHUNK] = R @ f
        R *= R
        K[start:start + _CHUNK] = R @ f
    J = 0.5 * (A + tr_sign * B)  # J[p] for p = 0..terms (J[0] unused)
    k2 = kappa**2
    powers = np.ones_like(kappa)
    for p in range(1, len(J)):
        K += p * powers * J[p]  # (p' + 1) kappa^(2p') J_{p'+1} with p' = p - 1
        powers = powers * k2
        H -= powers * J[p]
    return H, K


@lru_cache(maxsize=16)
def form_matrix(spec: BernsteinSpec, a: float, N: int) -> FormMatrix:
    """Galerkin matrix of the quadratic form in the first ``N`` sine modes."""
    if N < 2 or int(N) != N:
        raise DomainError(f"N must be an integer >= 2, got {N}")
    if not a > 0:
        raise DomainError(f"a must be positive, got {a}")
    j = np.arange(1, N + 1)
    kappa = j * math.pi / 2
    drift = spec.drift * (kappa / a) ** 2
    H = np.zeros(N)
    K = np.zeros(N)

    def psi_r(t):
        return spec.psi_rest(np.asarray(t, dtype=float) ** 2 / a**2)

    def psi_c(t):
        w = np.asarray(t, dtype=complex) ** 2 / a**2
        return spec.psi_complex(w) - spec.drift * w

    probe = np.asarray(psi_r(np.array([1.0, 10.0])), dtype=float)
    if np.any(probe != 0.0):
        n_panels = 4 * N
        T = n_panels * math.pi / 2
        t, w, cos2, sin2 = _head_rule(n_panels)
        pr = np.asarray(psi_r(t), dtype=float)
        if not np.all(np.isfinite(pr)):
            raise NumericError("psi is not finite on the quadrature nodes", N=N)
        A, B = _tail_coefficients(psi_r, psi_c, T, _SERIES_TERMS)
        odd_j = j % 2 == 1
        H[odd_j], K[odd_j] = _hk(kappa[odd_j], t, w * pr * cos2, A, B, +1.0)
        H[~odd_j], K[~odd_j] = _hk(kappa[~odd_j], t, w * pr * sin2, A, B, -1.0)
    even = _block(kappa[0::2], H[0::2], K[0::2])
    odd = _block(kappa[1::2], H[1::2], K[1::2])
    even[np.diag_indices_from(even)] += drift[0::2]
    odd[np.diag_indices_from(odd)] += drift[1::2]
    if np.any(np.diag(even) <= 0) or np.any(np.diag(odd) <= 0):
        raise InternalInconsistencyError("form matrix has a nonpositive diagonal entry")
    for blk in (even, odd):
        blk.setflags(write=False)
    return FormMatrix(a=float(a), N=int(N), even=even, odd=odd)


# -- eigensolver ----------------------------------------------------------------


def eigensolve(matrix, *, vectors: bool = True, check: bool = True):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix."""
    M = np.asarray(matrix, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError("eigensolve needs a square matrix")
    scale = float(np.max(np.abs(M))) if M.size else 0.0
    if not np.allclose(M, M.T, rtol=0, atol=1e-12 * max(scale, 1e-300)):
        raise DomainError("eigensolve needs a symmetric matrix")
    if not vectors:
        return linalg.eigh(M, eigvals_only=True), None
    lam, V = linalg.eigh(M)
    if check and M.size:
        norm = linalg.norm(M, 2) if M.shape[0] <= 64 else linalg.norm(M, "fro")
        res = np.linalg.norm(M @ V - V * lam, axis=0)
        if np.any(res > 1e-9 * norm):
            raise NumericError("eigenpair residual above tolerance", worst=float(res.max()), norm=norm)
    return lam, V


@dataclass(frozen=True)
class RitzSpectrum:
    """Ritz eigenvalues with parity labels and (optionally) coefficient vectors.

    ``parity[i]`` is ``"even"`` or ``"odd"``; ``vectors[i]`` holds the sine
    coefficients over the indices in ``indices[i]``.
    """

    a: float
    N: int
    eigenvalues: np.ndarray
    parity: tuple
    block_vectors: dict = field(repr=False, default_factory=dict)
    block_position: np.ndarray = field(repr=False, default=None)

    def coefficients(self, i: int) -> np.ndarray:
        """Full length-``N`` coefficient vector of the ``i``-th (0-based) Ritz function."""
        if not self.block_vectors:
            raise DomainError("spectrum was computed without eigenvectors")
        c = np.zeros(self.N)
        blk = self.parity[i]
        col = self.block_vectors[blk][:, self.block_position[i]]
        if blk == "even":
            c[0::2] = col
        else:
            c[1::2] = col
        return c

    def function(self, i: int, x):
        """Ritz function ``sum_j c_j e_j(x)``."""
        c = self.coefficients(i)
        j = np.nonzero(c)[0] + 1
        return c[j - 1] @ basis_function(self.a, j, x)


def _merge(a, N, even_vals, odd_vals, even_vecs=None, odd_vecs=None):
    vals = np.concatenate((even_vals, odd_vals))
    labels = np.array(["even"] * len(even_vals) + ["odd"] * len(odd_vals))
    pos = np.concatenate((np.arange(len(even_vals)), np.arange(len(odd_vals))))
    order = np.argsort(vals, kind="stable")
    vecs = {} if even_vecs is None else {"even": even_vecs, "odd": odd_vecs}
    return RitzSpectrum(
        a=a, N=N, eigenvalues=vals[order], parity=tuple(labels[order]),
        block_vectors=vecs, block_position=pos[order],
    )


@lru_cache(maxsize=8)
def spectrum(spec: BernsteinSpec, a: float, N: int, *, vectors: bool = True) -> RitzSpectrum:
    """Ritz spectrum of the form in the first ``N`` sine modes."""
    M = form_matrix(spec, a, N)
    ev, Ve = eigensolve(M.even, vectors=vectors)
    ov, Vo = eigensolve(M.odd, vectors=vectors)
    return _merge(float(a), int(N), ev, ov, Ve, Vo)


def ritz_values(spec: BernsteinSpec, a: float, N: int) -> np.ndarray:
    return spectrum(spec, a, N, vectors=False).eigenvalues


# -- trace inequality ---------------------------------------------------------


@dataclass(frozen=True)
class TraceCheck:
    t: float
    lhs: float
    tail_bound: float
    rhs: float
    margin: float
    ok: bool
    completed_ok: bool


def _heat_integral(spec, t, lo):
    """``int_lo^inf exp(-t psi(xi^2)) d xi``; the integrand is decreasing."""
    far = [math.exp(-t * float(spec.psi(x * x))) for x in (1e12, 1e13)]
    if far[0] > 0 and math.log10(far[0] / max(far[1], 1e-300)) <= 1.05:
        raise NumericError("heat trace integral diverges (integrand decays no faster than 1/xi)", t=t)
    # in u = log(xi) up to xi = 1e150, then a power-law tail fitted there
    u_lo = math.log(lo) if lo > 0 else -math.inf
    u_hi = 150 * math.log(10.0)
    if u_lo >= u_hi:
        return 0.0
    bps = [u_lo] + [k * math.log(10.0) for k in range(-3, 151, 3) if 10.0**k > lo] + [u_hi]

    def g(u):
        return math.exp(u - t * float(spec.psi(math.exp(2 * u))))

    total = 0.0
    for u0, u1 in zip(bps[:-1], bps[1:]):
        total += quadrature.quad(g, u0, u1, rtol=1e-12, atol=1e-300, limit=800, what="heat trace integral")
    g_hi, g_prev = g(u_hi), g(u_hi - 1.0)
    if g_hi > 0:
        rate = math.log(g_prev / g_hi)
        if rate <= 0:
            raise NumericError("heat trace integral diverges", t=t)
        total += g_hi / rate
    if not math.isfinite(total):
        raise NumericError("heat trace integral diverges", t=t)
    return total


def trace_check(spec: BernsteinSpec, a: float, t: float, spec_ritz: RitzSpectrum | None = None, *, N: int = 256) -> TraceCheck:
    """Heat-trace inequality ``sum exp(-lambda_n t) <= (2a/pi) int_0^inf exp(-t psi(xi^2)) d xi``.

    Ritz values overestimate the true eigenvalues, so the truncated sum on the
    left is a lower bound of the true trace.  ``tail_bound`` adds a lower bound
    for the terms ``n > N`` from ``lambda_n <= psi((n pi / 2a)^2)``, so
    ``lhs + tail_bound`` still bounds the true trace from below.
    """
    if not t > 0:
        raise DomainError("t must be positive")
    rs = spec_ritz if spec_ritz is not None else spectrum(spec, a, N, vectors=False)
    lhs = float(np.sum(np.exp(-t * rs.eigenvalues)))
    scale = 2 * a / math.pi
    tail = scale * _heat_integral(spec, t, (rs.N + 1) / scale)
    rhs = scale * _heat_integral(spec, t, 0.0)
    return TraceCheck(t=t, lhs=lhs, tail_bound=tail, rhs=rhs, margin=rhs - lhs - tail,
                      ok=lhs <= rhs, completed_ok=lhs + tail <= rhs)


# -- comparison and extrapolation -------------------------------------------------


@dataclass(frozen=True)
class CompareRow:
    n: int
    lambda_ritz: float
    lambda_tilde: float
    gap: float
    n_times_gap: float
    parity: str
    sandwich_ok: bool
    dist_bound: float | None = None
    dist_ok: bool | None = None


def compare(spec: BernsteinSpec, rs: RitzSpectrum, modes, residuals=None) -> list[CompareRow]:
    """Row-by-row comparison of Ritz values with ``psi(mu_n^2)``.

    ``residuals`` optionally maps ``n`` to ``(residual_bound, norm)``; the
    distance bound ``residual / norm`` is then checked against the Ritz values
    of the matching parity (even functions for odd ``n``).
    """
    rows = []
    for m in modes:
        n = m.n
        if n > len(rs.eigenvalues):
            break
        lam = float(rs.eigenvalues[n - 1])
        upper = float(spec.psi((n * math.pi / (2 * rs.a)) ** 2))
        dist_bound = dist_ok = None
        if residuals is not None and n in residuals:
            res, norm = residuals[n]
            dist_bound = res / math.sqrt(norm)
            want = "even" if n % 2 == 1 else "odd"
            same = rs.eigenvalues[np.array(rs.parity) == want]
            # Ritz values sit above the true ones, so allow the gap to close from above
            dist_ok = bool(np.min(np.abs(same - m.lambda_)) <= dist_bound or np.any(
                (same >= m.lambda_ - dist_bound) & (same <= m.lambda_ + dist_bound)))
        rows.append(CompareRow(
            n=n, lambda_ritz=lam, lambda_tilde=m.lambda_, gap=lam - m.lambda_,
            n_times_gap=n * (lam - m.lambda_), parity=rs.parity[n - 1],
            sandwich_ok=0.5 * upper <= lam, dist_bound=dist_bound, dist_ok=dist_ok,
        ))
    return rows


@dataclass(frozen=True)
class ShapeRow:
    n: int
    mu: float
    dist_plane_wave: float
    dist_approx: float


def _aligned_distance(w, r, f, normalise_f=True):
    r = r / math.sqrt(w @ r**2)
    if normalise_f:
        f = f / math.sqrt(w @ f**2)
    sign = 1.0 if w @ (r * f) >= 0 else -1.0
    return math.sqrt(w @ (sign * r - f) ** 2)


def shape_distances(spec: BernsteinSpec, a: float, N: int, n_max: int, *, panels: int = 400) -> list[ShapeRow]:
    """L2 distances of the normalised Ritz functions from ``cos``/``sin(mu_n x)``
    and from the glued approximate eigenfunctions, after sign alignment."""
    from .interval import approx_eigenfunction
    from .modes import solve_mode

    rs = spectrum(spec, a, N)
    x, w, _ = quadrature.composite_gauss(np.linspace(-a, a, panels + 1), _ORDER)
    rows = []
    for n in range(1, n_max + 1):
        mu = solve_mode(spec, a, n).mu
        r = rs.function(n - 1, x)
        wave = (np.cos(mu * x) if n % 2 else np.sin(mu * x)) / math.sqrt(a)
        phi = approx_eigenfunction(spec, a, n)(x)
        rows.append(ShapeRow(n=n, mu=mu, dist_plane_wave=_aligned_distance(w, r, wave, False),
                             dist_approx=_aligned_distance(w, r, phi)))
    return rows


def richardson(v1, v2, v3):
    """Aitken-style extrapolation from values at ``N``, ``2N``, ``4N``.

    Returns ``(limit, order)``; when the differences do not contract the
    finest value is returned with ``order = nan``.
    """
    v1, v2, v3 = (np.asarray(v, dtype=float) for v in (v1, v2, v3))
    d1, d2 = v1 - v2, v2 - v3
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = d1 / d2
        good = (ratio > 1.0) & np.isfinite(ratio)
        order = np.where(good, np.log2(np.where(good, ratio, 2.0)), np.nan)
        limit = np.where(good, v3 - d2 / (np.where(good, ratio, 2.0) - 1.0), v3)
    return limit, order


@dataclass(frozen=True)
class Extrapolation:
    sizes: tuple
    values: np.ndarray  # shape (len(sizes), n)
    limit: np.ndarray
    error: np.ndarray
    order: np.ndarray


def extrapolate(spec: BernsteinSpec, a: float, sizes=(512, 1024, 2048, 4096), n_max: int = 10) -> Extrapolation:
    """Extrapolate the first ``n_max`` Ritz values in ``N``.

    With four sizes two overlapping triplets give two limits; their
    difference (or the last increment, when only one triplet converges) is
    the reported error bar.
    """
    if len(sizes) < 3:
        raise ConfigError("extrapolation needs at least three basis sizes")
    vals = np.array([ritz_values(spec, a, N)[:n_max] for N in sizes])
    lim, order = richardson(vals[-3], vals[-2], vals[-1])
    if len(sizes) >= 4:
        lim_prev, _ = richardson(vals[-4], vals[-3], vals[-2])
        err = np.abs(lim - lim_prev)
    else:
        err = np.abs(vals[-1] - vals[-2])
    err = np.where(np.isnan(order), np.abs(vals[-1] - vals[-2]), err)
    return Extrapolation(sizes=tuple(sizes), values=vals, limit=lim, error=err, order=order)


# -- binary matrix dump ----------------------------------------------------------


def write_matrix(path, M) -> None:
    """Write ``MAGIC``, two little-endian uint32 dimensions and row-major float64 data."""
    M = np.ascontiguousarray(M, dtype="<f8")
    if M.ndim != 2:
        raise DomainError("only 2-d matrices can be written")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", *M.shape))
        fh.write(M.tobytes(order="C"))


def read_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(16)
        if len(head) != 16 or head[:8] != MAGIC:
            raise ConfigError(f"{path} is not a matrix dump")
        rows, cols = struct.unpack("<II", head[8:])
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != rows * cols:
        raise ConfigError(f"{path} is truncated")
    return data.reshape(rows, cols).astype(float)
