"""Eigenvalue asymptotics for ``psi(-d^2/dx^2)`` on an interval, where ``psi``
is a complete Bernstein function.

Modules: ``cbf`` (symbols), ``theta`` (phase shift), ``modes`` (mode
equation), ``halfline`` (half-line eigenfunctions), ``interval``
(approximate eigenfunctions and their bounds), ``galerkin`` (Rayleigh-Ritz
oracle) and ``cli``.

Set ``CBFWEYL_THREADS`` to cap the BLAS thread count; it must be set before
numpy is first imported to take effect.
"""

import os as _os

_threads = _os.environ.get("CBFWEYL_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from .cbf import (  # noqa: E402
    BernsteinSpec,
    KleinGordon,
    Log1p,
    MeasureDefined,
    Power,
    SumOfPowers,
    parse_psi,
)
from .errors import (  # noqa: E402
    CbfWeylError,
    ConfigError,
    DomainError,
    InternalInconsistencyError,
    NumericError,
)

__all__ = [
    "BernsteinSpec",
    "Power",
    "SumOfPowers",
    "KleinGordon",
    "Log1p",
    "MeasureDefined",
    "parse_psi",
    "CbfWeylError",
    "ConfigError",
    "DomainError",
    "NumericError",
    "InternalInconsistencyError",
]

__version__ = "0.1.0"
