"""Command-line front end: ``cbfweyl <subcommand> [flags]``.

Every subcommand writes one table (CSV or JSON) to ``--out`` or stdout.
Exit status is 0 on success, 1 when ``compare`` finds a failing check,
2 for configuration errors and 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import traceback

import numpy as np

from . import galerkin, halfline, interval, modes, theta
from .config import RunConfig, load_config
from .errors import CbfWeylError, ConfigError, DomainError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

#: Ritz values may exceed the upper eigenvalue bound by this relative slack
RITZ_SLACK = 0.05


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, np.integer):
        return int(v)
    return v


def render(columns, rows, fmt: str) -> str:
    """Table as CSV (shortest round-trip floats) or a JSON list of records."""
    if fmt == "json":
        records = [{c: _json_value(r[c]) for c in columns} for r in rows]
        return json.dumps(records, indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_cell(r[c]) for c in columns])
    return buf.getvalue()


def _emit(cfg: RunConfig, columns, rows):
    text = render(columns, rows, cfg.format)
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- subcommands --------------------------------------------------------------


def cmd_theta(cfg: RunConfig) -> int:
    rows = []
    for mu in cfg.mu:
        r = theta.phase(cfg.psi, mu, rtol=cfg.tol_quad)
        rows.append({"mu": r.mu, "theta": r.theta, "dtheta": r.dtheta, "lower": r.lower, "upper": r.upper})
    _emit(cfg, ["mu", "theta", "dtheta", "lower", "upper"], rows)
    return EXIT_OK


def cmd_modes(cfg: RunConfig) -> int:
    rows = []
    for n in range(1, cfg.n_max + 1):
        m = modes.solve_mode(cfg.psi, cfg.a, n, tol=cfg.tol_root, rtol=cfg.tol_quad)
        rows.append({
            "n": n, "mu": m.mu, "theta": m.theta, "lambda": m.lambda_,
            "first_order_mu": modes.first_order_mu(cfg.psi, cfg.a, n, rtol=cfg.tol_quad),
        })
    _emit(cfg, ["n", "mu", "theta", "lambda", "first_order_mu"], rows)
    return EXIT_OK


def _grid(cfg: RunConfig, default):
    x0, x1, n = cfg.grid if cfg.grid is not None else default
    return np.linspace(x0, x1, n)


def cmd_eigfun(cfg: RunConfig) -> int:
    if len(cfg.mu) != 1:
        raise ConfigError("eigfun takes a single --mu")
    mu = cfg.mu[0]
    h = halfline.halfline(cfg.psi, mu)
    x = _grid(cfg, (0.0, 10.0 * math.pi / mu, 201))
    F = np.asarray(h.F(x))
    G = np.where(x > 0, np.asarray(h.G(np.maximum(x, 1e-300))), 0.0)
    wave = np.where(x > 0, np.sin(mu * x + h.theta), 0.0)
    rows = [{"x": xi, "F": f, "G": g, "sin-part": s} for xi, f, g, s in zip(x, F, G, wave)]
    _emit(cfg, ["x", "F", "G", "sin-part"], rows)
    return EXIT_OK


def cmd_approx(cfg: RunConfig) -> int:
    a, b, n = cfg.a, cfg.b_value, cfg.n
    phi = interval.approx_eigenfunction(cfg.psi, a, n, b)
    x = _grid(cfg, (-a, a, 201))
    values = np.asarray(phi(x))
    _emit(cfg, ["x", "phi"], [{"x": xi, "phi": v} for xi, v in zip(x, values)])
    nb = interval.norm_bounds(cfg.psi, a, b, n, rtol=cfg.tol_quad)
    rb = interval.residual_bound(cfg.psi, a, b, n)
    summary = {
        "mu": phi.mode.mu, "lambda": phi.mode.lambda_, "norm_sq": nb.value,
        "norm_lower": nb.lower, "norm_upper": nb.upper, "residual_bound": rb.value,
    }
    text = json.dumps({k: _json_value(v) for k, v in summary.items()}, indent=1) + "\n"
    if cfg.out:
        with open(cfg.out + ".summary.json", "w") as fh:
            fh.write(text)
    else:
        sys.stderr.write(text)
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig) -> int:
    rs = galerkin.spectrum(cfg.psi, cfg.a, cfg.N, vectors=False)
    if cfg.dump_matrix:
        galerkin.write_matrix(cfg.dump_matrix, galerkin.form_matrix(cfg.psi, cfg.a, cfg.N).full())
    rows = [{"n": i + 1, "lambda": lam, "parity": p} for i, (lam, p) in enumerate(zip(rs.eigenvalues, rs.parity))]
    _emit(cfg, ["n", "lambda", "parity"], rows)
    return EXIT_OK


def compare_rows(cfg: RunConfig):
    """Rows of the ``compare`` table and whether every check passed.

    Checks per ``n``: the mode equation is solved, ``theta(mu_n)`` respects
    its closed-form bounds, and the Ritz value satisfies
    ``psi(k_n^2)/2 <= lambda_n <= (1 + RITZ_SLACK) psi(k_n^2)``.
    """
    rs = galerkin.spectrum(cfg.psi, cfg.a, cfg.N, vectors=False)
    table = [modes.solve_mode(cfg.psi, cfg.a, n, tol=cfg.tol_root, rtol=cfg.tol_quad) for n in range(1, cfg.n_max + 1)]
    rows = []
    all_ok = True
    for m, row in zip(table, galerkin.compare(cfg.psi, rs, table)):
        upper = float(cfg.psi.psi((m.n * math.pi / (2 * cfg.a)) ** 2))
        lo, hi = theta.theta_bounds(cfg.psi, m.mu)
        upper_ok = row.lambda_ritz <= (1 + RITZ_SLACK) * upper
        theta_ok = lo - 1e-9 <= m.theta <= hi + 1e-9
        mode_ok = abs(m.residual) <= modes.RESIDUAL_TOL
        ok = bool(row.sandwich_ok and upper_ok and theta_ok and mode_ok)
        all_ok &= ok
        rows.append({
            "n": m.n, "lambda_ritz": row.lambda_ritz, "lambda_tilde": row.lambda_tilde,
            "gap": row.gap, "n_gap": row.n_times_gap, "parity": row.parity,
            "sandwich_ok": bool(row.sandwich_ok and upper_ok), "theta_bounds_ok": theta_ok, "ok": ok,
        })
    return rows, all_ok


def cmd_compare(cfg: RunConfig) -> int:
    rows, ok = compare_rows(cfg)
    _emit(cfg, ["n", "lambda_ritz", "lambda_tilde", "gap", "n_gap", "parity", "sandwich_ok", "theta_bounds_ok", "ok"], rows)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_trace(cfg: RunConfig) -> int:
    rs = galerkin.spectrum(cfg.psi, cfg.a, cfg.N, vectors=False)
    rows = []
    for t in cfg.t:
        r = galerkin.trace_check(cfg.psi, cfg.a, t, rs)
        rows.append({"t": r.t, "lhs": r.lhs, "tail_bound": r.tail_bound, "rhs": r.rhs,
                     "margin": r.margin, "ok": r.ok, "completed_ok": r.completed_ok})
    _emit(cfg, ["t", "lhs", "tail_bound", "rhs", "margin", "ok", "completed_ok"], rows)
    return EXIT_OK


COMMANDS = {
    "theta": (cmd_theta, "phase shift table (mu, theta, dtheta, lower, upper)"),
    "modes": (cmd_modes, "roots of the mode equation for n = 1..nmax"),
    "eigfun": (cmd_eigfun, "half-line eigenfunction F = sin(mu x + theta) - G on a grid"),
    "approx": (cmd_approx, "approximate eigenfunction on (-a, a) plus a JSON summary"),
    "spectrum": (cmd_spectrum, "Rayleigh-Ritz eigenvalues in N sine modes"),
    "compare": (cmd_compare, "Ritz values against psi(mu_n^2); exit 0 iff all checks pass"),
    "trace": (cmd_trace, "heat-trace inequality at the given t"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cbfweyl", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML file with key = value pairs and a [psi] section")
    common.add_argument("--psi", help="family:params, e.g. power:1, sum_of_powers:1,0.5, klein_gordon")
    common.add_argument("--a", type=float, help="half-width of the interval")
    common.add_argument("--b", type=float, help="gluing half-width, 0 < b < a (default a/3)")
    common.add_argument("--N", type=int, help="number of sine modes in the Ritz basis")
    common.add_argument("--nmax", type=int, help="largest mode index")
    common.add_argument("--n", type=int, help="mode index for approx")
    common.add_argument("--mu", help="comma-separated mu values")
    common.add_argument("--t", help="comma-separated times for trace")
    common.add_argument("--grid", help="x0:x1:n evaluation grid")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--tol-quad", type=float, help="relative tolerance of the phase integrals")
    common.add_argument("--tol-root", type=float, help="absolute tolerance of the mode equation")
    common.add_argument("--dump-matrix", help="write the form matrix here (spectrum only)")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def _config_from_args(args) -> RunConfig:
    overrides = {
        "psi": args.psi, "a": args.a, "b": args.b, "N": args.N, "nmax": args.nmax, "n": args.n,
        "mu": args.mu, "t": args.t, "grid": args.grid, "out": args.out, "format": args.format,
        "tol_quad": args.tol_quad, "tol_root": args.tol_root, "dump_matrix": args.dump_matrix,
    }
    return load_config(args.config, overrides)


def _origin(exc: BaseException) -> str:
    """Name of the innermost package module on the traceback."""
    name = __package__ or "cbfweyl"
    for frame, _ in reversed(list(traceback.walk_tb(exc.__traceback__))):
        mod = frame.f_globals.get("__name__", "")
        if mod.startswith(name + "."):
            return mod
    return name


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = _config_from_args(args)
        return COMMANDS[args.command][0](cfg)
    except (ConfigError, DomainError, OSError) as exc:
        print(f"error [{_origin(exc)}]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CbfWeylError as exc:
        print(f"numeric error [{_origin(exc)}]: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
