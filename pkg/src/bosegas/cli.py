"""Batch command-line surface and machine-readable report emission.

Modes: solve, sweep, invert, observables, audit, validate-explicit.
Configuration comes from a flat key=value file ('#' comments) and/or flags;
flags override file keys. Outputs are CSV data tables (deterministic,
byte-identical for identical config and build) or a schema-versioned JSON
bundle; momentum tables land in separate files keyed by state.

Exit codes: 0 success, 2 configuration error, 3 convergence failure,
4 invariant violation, 1 anything else.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
import warnings
from dataclasses import dataclass, fields

import numpy as np

from . import __version__
from .errors import (BosegasError, ConfigurationError, ConvergenceError,
                     InvariantViolation)
from .grids import auto_r_max, fast_grid_size
from .observables import beta_moment, bound_audit, observables_report
from .potentials import (ExplicitSolutionSpec, explicit_potential,
                         gaussian_potential, potential_from_file)
from .solver import (CROSS_VALIDATED, FOURIER, MONOTONE, SolverConfig,
                     solve_fixed_e, solve_fixed_rho, sweep)

SCHEMA_VERSION = 1

MODES = ("solve", "sweep", "invert", "observables", "audit", "validate-explicit")
POTENTIALS = ("gaussian", "explicit", "tabulated")

# every accepted configuration key with its parser
_KEY_TYPES = {
    "mode": str, "potential": str, "scheme": str, "out": str, "format": str,
    "table": str,
    "e": float, "e_min": float, "e_max": float, "rho": float,
    "amp": float, "width": float, "b": float, "c": float, "v_e": float,
    "r_max": float, "k_min": float, "k_max": float,
    "e_steps": int, "grid_n": int, "k_steps": int,
}


@dataclass
class RunConfig:
    mode: str
    potential: str | None = None
    table: str | None = None
    amp: float | None = None
    width: float | None = None
    b: float | None = None
    c: float | None = None
    v_e: float | None = None
    e: float | None = None
    e_min: float | None = None
    e_max: float | None = None
    e_steps: int | None = None
    rho: float | None = None
    grid_n: int | None = None
    r_max: float | None = None
    scheme: str = FOURIER
    k_min: float | None = None
    k_max: float | None = None
    k_steps: int = 24
    out: str = "report"
    format: str = "csv"


def parse_config(text: str, overrides: dict | None = None) -> RunConfig:
    """Parse flat key=value text; collect every validation error at once."""
    errors = []
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            errors.append(f"line {lineno}: expected key=value, got {body!r}")
            continue
        key, _, value = body.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if key not in _KEY_TYPES:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        try:
            raw[key] = _KEY_TYPES[key](value)
        except ValueError:
            errors.append(f"line {lineno}: cannot parse {key}={value!r} as "
                          f"{_KEY_TYPES[key].__name__}")
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in _KEY_TYPES:
            errors.append(f"unknown option {key!r}")
            continue
        raw[key] = value

    mode = raw.get("mode")
    if mode is None:
        errors.append("missing required key 'mode'")
    elif mode not in MODES:
        errors.append(f"unknown mode {mode!r}; expected one of {MODES}")

    if mode in ("solve", "observables", "audit"):
        if "e" not in raw:
            errors.append(f"mode={mode} requires 'e'")
        if "potential" not in raw:
            errors.append(f"mode={mode} requires 'potential'")
    elif mode == "sweep":
        for key in ("e_min", "e_max", "e_steps"):
            if key not in raw:
                errors.append(f"mode=sweep requires '{key}'")
        if "potential" not in raw:
            errors.append("mode=sweep requires 'potential'")
    elif mode == "invert":
        if "rho" not in raw:
            errors.append("mode=invert requires 'rho'")
        if "potential" not in raw:
            errors.append("mode=invert requires 'potential'")
    elif mode == "validate-explicit":
        for key in ("b", "c", "e"):
            if key not in raw:
                errors.append(f"mode=validate-explicit requires '{key}'")

    pot = raw.get("potential")
    if pot is not None and pot not in POTENTIALS:
        errors.append(f"unknown potential {pot!r}; expected one of {POTENTIALS}")
    if pot == "gaussian":
        for key in ("amp", "width"):
            if key not in raw:
                errors.append(f"potential=gaussian requires '{key}'")
    elif pot == "explicit":
        for key in ("b", "c"):
            if key not in raw:
                errors.append(f"potential=explicit requires '{key}'")
        if mode in ("sweep", "invert") and "v_e" not in raw:
            errors.append("potential=explicit needs 'v_e' for sweep/invert "
                          "(the potential is built at a fixed energy)")
    elif pot == "tabulated":
        if "table" not in raw:
            errors.append("potential=tabulated requires 'table'")
    if raw.get("scheme") not in (None, FOURIER, MONOTONE, CROSS_VALIDATED):
        errors.append(f"unknown scheme {raw.get('scheme')!r}")
    if raw.get("format") not in (None, "csv", "json"):
        errors.append(f"unknown format {raw.get('format')!r} (csv or json)")
    for key in ("e", "e_min", "e_max", "rho", "amp", "width", "b", "v_e"):
        if key in raw and raw[key] is not None and raw[key] <= 0:
            errors.append(f"'{key}' must be positive, got {raw[key]}")

    if errors:
        raise ConfigurationError(errors)
    known = {f.name for f in fields(RunConfig)}
    return RunConfig(**{k: v for k, v in raw.items() if k in known})


# ---------------------------------------------------------------------------
# report bundle
# ---------------------------------------------------------------------------

@dataclass
class ReportBundle:
    metadata: dict
    columns: list
    rows: list
    audit_columns: list
    audit_rows: list
    momentum_tables: dict
    warnings: list


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def emit(bundle: ReportBundle, fmt: str | None = None, out: str | None = None) -> list:
    """Write the bundle; returns the list of files written."""
    fmt = fmt or bundle.metadata.get("format", "csv")
    out = out or bundle.metadata.get("out", "report")
    written = []
    if fmt == "csv":
        path = f"{out}.csv"
        with open(path, "w") as fh:
            fh.write(_csv_text(bundle.columns, bundle.rows))
        written.append(path)
        if bundle.audit_rows:
            path = f"{out}_audit.csv"
            with open(path, "w") as fh:
                fh.write(_csv_text(bundle.audit_columns, bundle.audit_rows))
            written.append(path)
        for key, (cols, rows) in bundle.momentum_tables.items():
            path = f"{out}_momentum_{key}.csv"
            with open(path, "w") as fh:
                fh.write(_csv_text(cols, rows))
            written.append(path)
    elif fmt == "json":
        payload = {
            "schema_version": SCHEMA_VERSION,
            "metadata": bundle.metadata,
            "table": {"columns": bundle.columns, "rows": bundle.rows},
            "audit": {"columns": bundle.audit_columns, "rows": bundle.audit_rows},
            "momentum": {k: {"columns": c, "rows": r}
                         for k, (c, r) in bundle.momentum_tables.items()},
            "warnings": bundle.warnings,
        }
        path = f"{out}.json"
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=1, sort_keys=True)
            fh.write("\n")
        written.append(path)
    else:
        raise ConfigurationError(f"unknown format {fmt!r}")
    return written


# ---------------------------------------------------------------------------
# mode implementations
# ---------------------------------------------------------------------------

def _solver_config(config: RunConfig, e_min: float, range_hint: float,
                   scale: float) -> SolverConfig:
    r_max = config.r_max if config.r_max is not None else auto_r_max(e_min, scale)
    if config.grid_n is not None:
        n = config.grid_n
    else:
        dr = min(0.25, range_hint / 8.0)
        n = fast_grid_size(min(max(int(r_max / dr), 4096), 4_000_000))
    return SolverConfig(n=n, r_max=r_max, scheme=config.scheme)


def _build_potential(config: RunConfig, grid, default_e: float | None):
    if config.potential == "gaussian":
        return gaussian_potential(config.amp, config.width, grid)
    if config.potential == "explicit":
        v_e = config.v_e if config.v_e is not None else default_e
        spec = ExplicitSolutionSpec(b=config.b, c=config.c, e=v_e)
        return explicit_potential(spec, grid)
    if config.potential == "tabulated":
        return potential_from_file(config.table, grid)
    raise ConfigurationError(f"mode={config.mode} requires a potential")


def _state_row(state):
    return {
        "e": state.e, "rho": state.rho, "e_rho": state.e * state.rho,
        "iterations": state.iterations, "scheme": state.scheme_used,
        "pde_residual": state.pde_residual,
        "constraint_residual": state.constraint_residual,
        "normalization_defect": state.normalization_defect(),
        "tail_mass": state.tail_mass,
    }


def _audit_table(audit):
    columns = ["name", "lhs", "rhs", "margin", "passed", "kind", "note"]
    rows = [[r.name, r.lhs, r.rhs, r.margin, r.passed, r.kind, r.note]
            for r in audit.rows]
    return columns, rows


def run(config: RunConfig) -> ReportBundle:
    """Execute one mode; raises package errors for the exit-code mapping."""
    t_start = time.perf_counter()
    momentum_tables = {}
    audit_cols, audit_rows = [], []

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")

        if config.mode == "validate-explicit":
            spec = ExplicitSolutionSpec(b=config.b, c=config.c, e=config.e)
            scale = 800.0 * np.sqrt(config.e) / config.b   # ~800/b of truncation
            solver_cfg = _solver_config(config, config.e, 1.0 / config.b, scale)
            v = explicit_potential(spec, solver_cfg.grid_for(config.e))
            state = solve_fixed_e(v, config.e, solver_cfg)
            u_exact = spec.u_profile(state.grid.r)
            max_err = float(np.max(np.abs(state.u.values - u_exact)))
            rho_err = abs(state.rho - spec.rho) / spec.rho
            row = _state_row(state)
            row.update({
                "max_u_error": max_err, "rho_exact": spec.rho,
                "rho_rel_error": rho_err, "beta_exact": spec.beta,
                "beta_measured": beta_moment(state),
            })
            state.require_invariants()
            if max_err > 1e-4 or rho_err > 1e-6:
                raise InvariantViolation(
                    f"closed-form validation failed: max|u - u_exact| = {max_err:.3e}, "
                    f"rho error {rho_err:.3e}; refine the grid (grid_n, r_max)"
                )
            columns, rows = list(row), [list(row.values())]

        elif config.mode in ("solve", "observables", "audit"):
            solver_cfg = _solver_config(config, config.e, _range_hint(config), 400.0)
            v = _build_potential(config, solver_cfg.grid_for(config.e), config.e)
            state = solve_fixed_e(v, config.e, solver_cfg)
            state.require_invariants()
            row = _state_row(state)
            if config.mode == "observables":
                k_lo = config.k_min or 10.0 * np.sqrt(state.e)
                k_hi = config.k_max or min(100.0 * np.sqrt(state.e),
                                           0.5 / _range_hint(config),
                                           float(state.grid.k[-1]))
                ks = np.geomspace(k_lo, k_hi, config.k_steps) if k_hi > k_lo else []
                report = observables_report(state, a0=v.a0, k_values=ks)
                row.update({
                    "eta": report.eta,
                    "eta_bogolyubov": report.eta_bogolyubov,
                    "a0": report.a0, "rho_a0_cubed": report.rho_a0_cubed,
                    "lhy_ratio": report.lhy_ratio,
                    "beta": report.beta,
                    "decay_measured": _maybe(report.decay.measured_amplitude),
                    "decay_predicted": _maybe(report.decay.predicted_amplitude),
                    "decay_exponent": _maybe(report.decay.exponent),
                    "tan_constant": report.tan_constant,
                    "obs_denominator": report.denominator,
                })
                if report.momentum_samples:
                    momentum_tables[f"e{state.e:g}"] = (
                        ["k", "M", "k4_M"],
                        [list(row_) for row_ in report.momentum_samples],
                    )
                else:
                    warnings.warn(
                        "momentum window is empty (10 sqrt(e) exceeds the "
                        "inverse potential width); pass k_min/k_max to sample "
                        "the distribution", UserWarning, stacklevel=1,
                    )
            if config.mode == "audit":
                audit = bound_audit(state)
                audit_cols, audit_rows = _audit_table(audit)
                failures = audit.failures()
                if failures:
                    raise InvariantViolation(
                        "bound audit failed: " + ", ".join(r.name for r in failures)
                    )
            columns, rows = list(row), [list(row.values())]

        elif config.mode == "invert":
            solver_cfg = _solver_config(
                config, config.rho * 2.0, _range_hint(config), 400.0)
            v = _build_potential(config, solver_cfg.grid_for(config.rho * 2.0),
                                 config.v_e)
            state = solve_fixed_rho(v, config.rho, solver_cfg)
            state.require_invariants()
            row = _state_row(state)
            row["rho_target"] = config.rho
            columns, rows = list(row), [list(row.values())]

        elif config.mode == "sweep":
            e_values = np.geomspace(config.e_min, config.e_max, config.e_steps)
            solver_cfg = _solver_config(config, config.e_min, _range_hint(config), 40.0)
            v = _build_potential(config, solver_cfg.grid_for(config.e_min),
                                 config.v_e)
            record = sweep(v, e_values, solver_cfg)
            columns = ["e", "rho", "rho_prime_analytic", "rho_prime_fd", "e_rho",
                       "convexity_indicator", "regime", "e_rho_increasing", "error"]
            rows = [[r.e, r.rho, r.rho_prime_analytic, r.rho_prime_fd, r.e_rho,
                     r.convexity_indicator, r.regime, r.e_rho_increasing,
                     r.error or ""] for r in record.rows]
            if config.e_steps < 3:
                warnings.warn("insufficient rows for convexity columns",
                              UserWarning, stacklevel=1)
        else:
            raise ConfigurationError(f"unhandled mode {config.mode!r}")

    seen, warn_list = set(), []
    for w in caught:
        msg = str(w.message)
        if msg not in seen:
            seen.add(msg)
            warn_list.append(msg)

    metadata = {
        "mode": config.mode,
        "potential": config.potential,
        "scheme": config.scheme,
        "version": __version__,
        "schema_version": SCHEMA_VERSION,
        "wall_time_s": time.perf_counter() - t_start,
        "out": config.out,
        "format": config.format,
    }
    return ReportBundle(
        metadata=metadata, columns=columns, rows=rows,
        audit_columns=audit_cols, audit_rows=audit_rows,
        momentum_tables=momentum_tables, warnings=warn_list,
    )


def _maybe(x):
    return np.nan if x is None else x


def _range_hint(config: RunConfig) -> float:
    if config.potential == "gaussian" and config.width:
        return config.width
    if config.potential == "explicit" and config.b:
        return 1.0 / config.b
    return 1.0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_argparser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bosegas",
        description="Ground-state pair-correlation solver for the repulsive Bose gas",
    )
    parser.add_argument("--config", help="key=value config file ('#' comments)")
    parser.add_argument("--mode", choices=MODES)
    parser.add_argument("--potential", choices=POTENTIALS)
    parser.add_argument("--table", help="two-column (r, v) text file")
    parser.add_argument("--amp", type=float)
    parser.add_argument("--width", type=float)
    parser.add_argument("--b", type=float)
    parser.add_argument("--c", type=float)
    parser.add_argument("--v-e", dest="v_e", type=float,
                        help="construction energy of the explicit potential")
    parser.add_argument("--e", type=float)
    parser.add_argument("--e-min", dest="e_min", type=float)
    parser.add_argument("--e-max", dest="e_max", type=float)
    parser.add_argument("--e-steps", dest="e_steps", type=int)
    parser.add_argument("--rho", type=float)
    parser.add_argument("--grid-n", dest="grid_n", type=int)
    parser.add_argument("--r-max", dest="r_max", type=float)
    parser.add_argument("--scheme", choices=(FOURIER, MONOTONE, CROSS_VALIDATED))
    parser.add_argument("--k-min", dest="k_min", type=float)
    parser.add_argument("--k-max", dest="k_max", type=float)
    parser.add_argument("--k-steps", dest="k_steps", type=int)
    parser.add_argument("--out")
    parser.add_argument("--format", choices=("csv", "json"))
    return parser


def main(argv=None) -> int:
    args = build_argparser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k != "config"}
    try:
        text = ""
        if args.config:
            with open(args.config) as fh:
                text = fh.read()
        config = parse_config(text, overrides)
        bundle = run(config)
        files = emit(bundle, config.format, config.out)
    except ConfigurationError as exc:
        for message in exc.messages:
            print(f"config error: {message}", file=sys.stderr)
        return exc.exit_code
    except (ConvergenceError, InvariantViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except BosegasError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    for message in bundle.warnings:
        print(f"warning: {message}", file=sys.stderr)
    for path in files:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
