"""Quadrature helpers: composite Gauss-Legendre rules and a checked wrapper
around QUADPACK's adaptive Gauss-Kronrod integrator."""

from __future__ import annotations

import warnings
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import NumericError

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-14


@lru_cache(maxsize=32)
def _legendre(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_gauss(edges, order: int = 10):
    """Nodes and weights of a composite Gauss-Legendre rule.

    ``edges`` is an increasing sequence of panel boundaries; every panel gets
    ``order`` nodes.  Returns ``(nodes, weights, panel_index)``.
    """
    edges = np.asarray(edges, dtype=float)
    x, w = _legendre(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    panel = np.repeat(np.arange(len(half)), order)
    return nodes, weights, panel


def graded_edges(lo: float, hi: float, levels: int = 40) -> np.ndarray:
    """Edges of [lo, hi] refined geometrically towards ``lo``."""
    width = hi - lo
    inner = lo + width * 2.0 ** -np.arange(levels, 0, -1)
    return np.concatenate(([lo], inner, [hi]))


def quad(f, a, b, *, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, limit=400, what="integral", **kw):
    """``scipy.integrate.quad`` that raises instead of warning.

    A result is accepted when the reported error estimate is below
    ``max(atol, rtol * |value|)`` times a safety factor of 10; QUADPACK's
    estimates are conservative and a hard failure here would be noisy.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err, info = integrate.quad(
            f, a, b, epsabs=atol, epsrel=rtol, limit=limit, full_output=1, **kw
        )[:3]
    if not np.isfinite(value) or err > 10.0 * max(atol, rtol * abs(value)) + 1e-300:
        raise NumericError(
            f"adaptive quadrature did not converge for {what}",
            interval=(a, b),
            value=value,
            error_estimate=err,
            evaluations=info.get("neval"),
        )
    return value
