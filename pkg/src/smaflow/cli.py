"""Command-line surface.

Subcommands: simulate, steady, energy-audit, fit-rate, probe-uniqueness.
Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import __version__
from .config import build_state, export_config, load_config
from .diagnostics import DiagnosticsError, energy_audit, fit_decay_rate
from .equilibrium import SteadyNonConvergence, steady_solve, uniqueness_probe
from .integrator import DivergenceError, run
from .io import SnapshotError, TimeseriesError, read_timeseries, save_snapshot, write_timeseries
from .model import State
from .spectral import ConfigurationError, VectorField

__all__ = ["cli", "main"]

_DOMAIN_ERRORS = (
    ConfigurationError,
    DiagnosticsError,
    SnapshotError,
    TimeseriesError,
    SteadyNonConvergence,
    DivergenceError,
)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smaflow", description="Smectic-A flow simulator")
    parser.add_argument(
        "--version",
        action="version",
        version=f"smaflow {__version__} (snapshot format SMAFLOW1, timeseries schema v1)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a simulation and export its time series")
    p.add_argument("config", help="JSON configuration file")

    p = sub.add_parser("steady", help="solve the stationary layer problem")
    p.add_argument("config", help="JSON configuration file")

    p = sub.add_parser("energy-audit", help="audit the discrete energy law of a time series")
    p.add_argument("timeseries", help="CSV or JSON time series")
    p.add_argument("--stencil", choices=("forward", "trapezoid"), default="forward")

    p = sub.add_parser("fit-rate", help="fit a decay law to a time-series column")
    p.add_argument("timeseries", help="CSV or JSON time series")
    p.add_argument("--column", required=True)
    p.add_argument("--window", required=True, help="fit window as 'a,b'")

    p = sub.add_parser("probe-uniqueness", help="steady solves from several seeds")
    p.add_argument("config", help="JSON configuration file")
    p.add_argument("--seeds", type=int, default=4, help="number of seeds (>= 2)")
    return parser


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    base = Path(args.config).parent
    state = build_state(cfg, base_dir=base)
    outdir = Path(cfg.outdir)
    if not outdir.is_absolute():
        outdir = base / outdir
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.json").write_text(json.dumps(export_config(cfg), indent=1) + "\n", encoding="utf-8")

    try:
        traj = run(state, cfg.params, cfg.stepping)
    except DivergenceError as err:
        if err.trajectory is not None and err.trajectory.records:
            for fmt in cfg.formats:
                write_timeseries(err.trajectory, outdir / f"timeseries.{fmt}", fmt)
        raise

    for fmt in cfg.formats:
        write_timeseries(traj, outdir / f"timeseries.{fmt}", fmt)
    snapdir = outdir / "snapshots"
    snapdir.mkdir(exist_ok=True)
    for t, s in traj.snapshots:
        save_snapshot(s, snapdir / f"state_{t:012.6f}.snap")
    if cfg.figures:
        from .figures import render_run_figures

        render_run_figures(traj.records, outdir, final_state=traj.snapshots[-1][1])
    last = traj.records[-1]
    print(f"simulate: {len(traj.records)} records to t={last.t:g}, E={last.E:.6g} -> {outdir}")
    return 0


def _cmd_steady(args) -> int:
    cfg = load_config(args.config)
    base = Path(args.config).parent
    state = build_state(cfg, base_dir=base)
    outdir = Path(cfg.outdir)
    if not outdir.is_absolute():
        outdir = base / outdir
    outdir.mkdir(parents=True, exist_ok=True)

    phi_inf, history = steady_solve(state.phi, cfg.params, cfg.steady)
    eq_state = State(v=VectorField.zeros(phi_inf.grid), phi=phi_inf, t=0.0)
    save_snapshot(eq_state, outdir / "phi_inf.snap")
    lines = ["iteration,q_l2"] + [f"{i},{r:.17g}" for i, r in enumerate(history)]
    (outdir / "steady_residuals.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    if cfg.figures:
        from .figures import render_residual_figure

        render_residual_figure(history, outdir)
    print(f"steady: residual {history[-1]:.3e} after {len(history) - 1} accepted steps -> {outdir}")
    return 0


def _cmd_energy_audit(args) -> int:
    records = read_timeseries(args.timeseries)
    audit = energy_audit(records, stencil=args.stencil)
    print(json.dumps({
        "records": len(records),
        "stencil": args.stencil,
        "max_abs_residual": audit.max_abs,
        "mean_abs_residual": audit.mean_abs,
    }, indent=1))
    return 0


def _cmd_fit_rate(args) -> int:
    records = read_timeseries(args.timeseries)
    try:
        a, b = (float(x) for x in args.window.split(","))
    except ValueError:
        raise ConfigurationError(f"--window must be 'a,b', got {args.window!r}") from None
    from .io import TIMESERIES_COLUMNS

    if args.column not in TIMESERIES_COLUMNS:
        raise ConfigurationError(f"unknown column {args.column!r}; expected one of {TIMESERIES_COLUMNS}")
    times = [r.t for r in records]
    values = [getattr(r, args.column) for r in records]
    fit = fit_decay_rate(times, values, (a, b))
    print(json.dumps(dataclasses.asdict(fit), indent=1))
    return 0


def _cmd_probe(args) -> int:
    cfg = load_config(args.config)
    if args.seeds < 2:
        raise ConfigurationError(f"--seeds must be >= 2, got {args.seeds}")
    report = uniqueness_probe(
        cfg.params,
        seeds=list(range(args.seeds)),
        mean=cfg.steady.mean if cfg.steady.mean is not None else 0.0,
        n=cfg.n,
        c=cfg.steady,
    )
    print(json.dumps(dataclasses.asdict(report), indent=1))
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "steady": _cmd_steady,
    "energy-audit": _cmd_energy_audit,
    "fit-rate": _cmd_fit_rate,
    "probe-uniqueness": _cmd_probe,
}


def cli(argv: list[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except _DOMAIN_ERRORS as err:
        print(f"smaflow: error: {err}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli())
