"""Run configuration: a TOML file of ``key = value`` pairs plus a ``[psi]``
section, with command-line flags taking precedence."""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field

from .cbf import BernsteinSpec, Power, parse_psi, spec_from_mapping
from .errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["RunConfig", "load_config", "parse_floats", "parse_grid"]

FORMATS = ("csv", "json")


@dataclass(frozen=True)
class RunConfig:
    psi: BernsteinSpec = field(default_factory=lambda: Power(1.0))
    a: float = 1.0
    b: float | None = None
    N: int = 1024
    n_max: int = 10
    n: int = 1
    mu: tuple = (1.0,)
    t: tuple = (0.1, 0.5, 1.0)
    grid: tuple | None = None
    tol_quad: float = 1e-9
    tol_root: float = 1e-12
    format: str = "csv"
    out: str | None = None
    dump_matrix: str | None = None

    def __post_init__(self):
        if not (self.a > 0 and math.isfinite(self.a)):
            raise ConfigError(f"a must be positive, got {self.a}")
        if self.b is not None and not 0 < self.b < self.a:
            raise ConfigError(f"need 0 < b < a, got b = {self.b}, a = {self.a}")
        if self.n_max < 1 or self.n < 1:
            raise ConfigError("nmax and n must be positive integers")
        if self.N < 2 * self.n_max:
            raise ConfigError(f"N = {self.N} must be at least 2 * nmax = {2 * self.n_max}")
        if not (self.tol_quad > 0 and self.tol_root > 0):
            raise ConfigError("tolerances must be positive")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
        if any(not (m > 0 and math.isfinite(m)) for m in self.mu):
            raise ConfigError("every mu must be positive")
        if any(not (t > 0 and math.isfinite(t)) for t in self.t):
            raise ConfigError("every t must be positive")

    @property
    def b_value(self) -> float:
        return self.a / 3.0 if self.b is None else self.b


def parse_floats(text) -> tuple:
    """``"1,10,100"`` (or a number, or a list) as a tuple of floats."""
    if isinstance(text, (int, float)):
        return (float(text),)
    if isinstance(text, (list, tuple)):
        items = list(text)
    else:
        items = [s for s in str(text).split(",") if s.strip()]
    try:
        return tuple(float(v) for v in items)
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of numbers, got {text!r}") from None


def parse_grid(text: str) -> tuple:
    """``"x0:x1:n"`` as ``(x0, x1, n)``."""
    parts = str(text).split(":")
    try:
        x0, x1, n = float(parts[0]), float(parts[1]), int(parts[2])
    except (IndexError, ValueError):
        raise ConfigError(f"grid must look like x0:x1:n, got {text!r}") from None
    if len(parts) != 3 or n < 1 or not x1 >= x0:
        raise ConfigError(f"grid must look like x0:x1:n with x1 >= x0 and n >= 1, got {text!r}")
    return x0, x1, n


_KEYS = {
    "a": float, "b": float, "N": int, "nmax": int, "n": int,
    "mu": parse_floats, "t": parse_floats, "grid": parse_grid,
    "tol_quad": float, "tol_root": float, "format": str, "out": str, "dump_matrix": str,
}
_RENAME = {"nmax": "n_max"}


def _psi_value(value) -> BernsteinSpec:
    if isinstance(value, dict):
        return spec_from_mapping(value)
    if isinstance(value, str):
        return parse_psi(value)
    raise ConfigError(f"cannot interpret psi = {value!r}")


def _normalise(raw: dict) -> dict:
    out = {}
    for key, value in raw.items():
        k = key.replace("-", "_") if key not in _KEYS else key
        if k == "psi":
            out["psi"] = _psi_value(value)
            continue
        if k not in _KEYS:
            raise ConfigError(f"unknown configuration key {key!r}")
        try:
            out[_RENAME.get(k, k)] = _KEYS[k](value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from None
    return out


def load_config(path: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Read ``path`` (if given), apply non-``None`` ``overrides`` and validate."""
    values = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        values.update(_normalise(raw))
    values.update(_normalise({k: v for k, v in (overrides or {}).items() if v is not None}))
    if "N" not in values and "n_max" in values:
        values["N"] = max(RunConfig.N, 2 * values["n_max"])
    if "n_max" not in values and "N" in values:
        values["n_max"] = max(1, min(RunConfig.n_max, values["N"] // 2))
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None

