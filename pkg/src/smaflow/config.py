"""Run configuration: a strict JSON key tree with documented defaults.

Schema (all sections optional except "n"; unknown keys are rejected):

    {
      "n": 32,
      "params":   {"mu1": 0.0, "mu4": 1.0, "mu5": 0.0,
                   "K": 1.0, "lambda": 1.0, "epsilon": 1.0},
      "stepping": {"dt": 1e-4, "t_end": 1.0, "scheme": "imex1",
                   "dealias": "two_thirds", "snapshot_every": 1000,
                   "diag_every": 10},
      "initial":  {"v":   {"kind": "zero" | "taylor_green" | "random_band"
                                  | "from_snapshot", ...},
                   "phi": {"kind": "zero" | "random_band" | "from_snapshot", ...}},
      "steady":   {"tol": 1e-10, "dt0": 1e-6, "max_iters": 20000, "mean": 0.0},
      "output":   {"dir": "out", "formats": ["csv"], "figures": true}
    }

Initial-condition kinds take: taylor_green(amplitude), random_band(max_mode,
amplitude, seed), from_snapshot(path).  taylor_green applies to v only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .equilibrium import SteadyConfig
from .integrator import StepConfig
from .model import Params, State
from .spectral import (
    ConfigurationError,
    Field,
    Grid,
    VectorField,
    make_grid,
    random_band_field,
    random_band_velocity,
)

__all__ = ["InitialSpec", "RunConfig", "load_config", "resolve_config", "export_config", "build_state"]

IC_KINDS_V = ("zero", "taylor_green", "random_band", "from_snapshot")
IC_KINDS_PHI = ("zero", "random_band", "from_snapshot")


@dataclass(frozen=True)
class InitialSpec:
    kind: str = "zero"
    amplitude: float = 0.1
    max_mode: int = 4
    seed: int = 0
    mean: float = 0.0
    path: str | None = None


@dataclass(frozen=True)
class RunConfig:
    n: int
    params: Params = field(default_factory=Params)
    stepping: StepConfig = field(default_factory=lambda: StepConfig(dt=1e-4, t_end=1.0, diag_every=10))
    initial_v: InitialSpec = field(default_factory=InitialSpec)
    initial_phi: InitialSpec = field(default_factory=InitialSpec)
    steady: SteadyConfig = field(default_factory=lambda: SteadyConfig(mean=0.0))
    outdir: str = "out"
    formats: tuple[str, ...] = ("csv",)
    figures: bool = True


def _require_keys(section: dict, allowed: set[str], where: str):
    unknown = set(section) - allowed
    if unknown:
        name = sorted(unknown)[0]
        label = f"{where}.{name}" if where else name
        raise ConfigurationError(f"unknown configuration key {label!r}")


def _number(section: dict, key: str, default, where: str) -> float:
    val = section.get(key, default)
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigurationError(f"{where}.{key} must be a number, got {val!r}")
    return float(val)


def _integer(section: dict, key: str, default, where: str) -> int:
    val = section.get(key, default)
    if isinstance(val, bool) or not isinstance(val, (int,)):
        raise ConfigurationError(f"{where}.{key} must be an integer, got {val!r}")
    return int(val)


def _initial(section: dict, where: str, kinds: tuple[str, ...]) -> InitialSpec:
    _require_keys(section, {"kind", "amplitude", "max_mode", "seed", "mean", "path"}, where)
    kind = section.get("kind", "zero")
    if kind not in kinds:
        raise ConfigurationError(f"{where}.kind must be one of {kinds}, got {kind!r}")
    ic = InitialSpec(
        kind=kind,
        amplitude=_number(section, "amplitude", 0.1, where),
        max_mode=_integer(section, "max_mode", 4, where),
        seed=_integer(section, "seed", 0, where),
        mean=_number(section, "mean", 0.0, where),
        path=section.get("path"),
    )
    if kind == "from_snapshot":
        if not ic.path:
            raise ConfigurationError(f"{where}.path is required for kind 'from_snapshot'")
    if ic.max_mode < 1:
        raise ConfigurationError(f"{where}.max_mode must be >= 1, got {ic.max_mode}")
    return ic


def resolve_config(tree: dict, base_dir: Path | None = None) -> RunConfig:
    """Validate a parsed key tree and fill in the documented defaults."""
    if not isinstance(tree, dict):
        raise ConfigurationError("configuration root must be an object")
    _require_keys(tree, {"n", "params", "stepping", "initial", "steady", "output"}, "")
    if "n" not in tree:
        raise ConfigurationError("n is required")
    n = tree["n"]
    if isinstance(n, bool) or not isinstance(n, int):
        raise ConfigurationError(f"n must be an integer, got {n!r}")

    par = tree.get("params", {})
    _require_keys(par, {"mu1", "mu4", "mu5", "K", "lambda", "epsilon"}, "params")
    params = Params(
        mu1=_number(par, "mu1", 0.0, "params"),
        mu4=_number(par, "mu4", 1.0, "params"),
        mu5=_number(par, "mu5", 0.0, "params"),
        K=_number(par, "K", 1.0, "params"),
        lam=_number(par, "lambda", 1.0, "params"),
        eps=_number(par, "epsilon", 1.0, "params"),
    )

    st = tree.get("stepping", {})
    _require_keys(st, {"dt", "t_end", "scheme", "dealias", "snapshot_every", "diag_every"}, "stepping")
    scheme = st.get("scheme", "imex1")
    rule = st.get("dealias", "two_thirds")
    stepping = StepConfig(
        dt=_number(st, "dt", 1e-4, "stepping"),
        t_end=_number(st, "t_end", 1.0, "stepping"),
        scheme=scheme,
        dealias=rule,
        snapshot_every=_integer(st, "snapshot_every", 1000, "stepping"),
        diag_every=_integer(st, "diag_every", 10, "stepping"),
    )
    if rule not in ("two_thirds", "half", "none"):
        raise ConfigurationError(f"stepping.dealias must be two_thirds, half, or none, got {rule!r}")

    init = tree.get("initial", {})
    _require_keys(init, {"v", "phi"}, "initial")
    initial_v = _initial(init.get("v", {}), "initial.v", IC_KINDS_V)
    initial_phi = _initial(init.get("phi", {}), "initial.phi", IC_KINDS_PHI)

    sd = tree.get("steady", {})
    _require_keys(sd, {"tol", "dt0", "max_iters", "mean"}, "steady")
    steady = SteadyConfig(
        tol=_number(sd, "tol", 1e-10, "steady"),
        dt0=_number(sd, "dt0", 1e-6, "steady"),
        max_iters=_integer(sd, "max_iters", 20000, "steady"),
        mean=_number(sd, "mean", 0.0, "steady"),
    )

    out = tree.get("output", {})
    _require_keys(out, {"dir", "formats", "figures"}, "output")
    formats = out.get("formats", ["csv"])
    if not isinstance(formats, list) or not formats or any(f not in ("csv", "json") for f in formats):
        raise ConfigurationError(f"output.formats must be a non-empty list drawn from ['csv', 'json'], got {formats!r}")
    figures = out.get("figures", True)
    if not isinstance(figures, bool):
        raise ConfigurationError(f"output.figures must be a boolean, got {figures!r}")

    cfg = RunConfig(
        n=n,
        params=params,
        stepping=stepping,
        initial_v=initial_v,
        initial_phi=initial_phi,
        steady=steady,
        outdir=str(out.get("dir", "out")),
        formats=tuple(formats),
        figures=figures,
    )
    make_grid(cfg.n)  # validates the resolution
    for ic, where in ((cfg.initial_v, "initial.v"), (cfg.initial_phi, "initial.phi")):
        if ic.kind == "from_snapshot":
            path = Path(ic.path)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            if not path.exists():
                raise ConfigurationError(f"{where}.path does not exist: {path}")
    return cfg


def load_config(path: str | Path) -> RunConfig:
    """Load and validate a JSON configuration file."""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"configuration file not found: {path}")
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as err:
        raise ConfigurationError(f"cannot read configuration file {path}: {err}") from err
    try:
        tree = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigurationError(f"parse error in {path} at line {err.lineno}: {err.msg}") from err
    return resolve_config(tree, base_dir=path.parent)


def export_config(cfg: RunConfig) -> dict:
    """Fully resolved key tree; reloading it reproduces the same RunConfig."""

    def ic_tree(ic: InitialSpec) -> dict:
        out = {"kind": ic.kind, "amplitude": ic.amplitude, "max_mode": ic.max_mode,
               "seed": ic.seed, "mean": ic.mean}
        if ic.path is not None:
            out["path"] = ic.path
        return out

    return {
        "n": cfg.n,
        "params": {
            "mu1": cfg.params.mu1, "mu4": cfg.params.mu4, "mu5": cfg.params.mu5,
            "K": cfg.params.K, "lambda": cfg.params.lam, "epsilon": cfg.params.eps,
        },
        "stepping": {
            "dt": cfg.stepping.dt, "t_end": cfg.stepping.t_end, "scheme": cfg.stepping.scheme,
            "dealias": cfg.stepping.dealias, "snapshot_every": cfg.stepping.snapshot_every,
            "diag_every": cfg.stepping.diag_every,
        },
        "initial": {"v": ic_tree(cfg.initial_v), "phi": ic_tree(cfg.initial_phi)},
        "steady": {"tol": cfg.steady.tol, "dt0": cfg.steady.dt0,
                   "max_iters": cfg.steady.max_iters, "mean": cfg.steady.mean},
        "output": {"dir": cfg.outdir, "formats": list(cfg.formats), "figures": cfg.figures},
    }


def _taylor_green(grid: Grid, amplitude: float) -> VectorField:
    s1, c1 = np.sin(2 * np.pi * grid.x1), np.cos(2 * np.pi * grid.x1)
    s2, c2 = np.sin(2 * np.pi * grid.x2), np.cos(2 * np.pi * grid.x2)
    return VectorField(
        Field.from_physical(grid, amplitude * s1 * c2),
        Field.from_physical(grid, -amplitude * c1 * s2),
    )


def build_state(cfg: RunConfig, base_dir: Path | None = None) -> State:
    """Materialize the initial state described by the configuration."""
    from .io import load_snapshot

    grid = make_grid(cfg.n)

    def resolve_path(ic: InitialSpec) -> Path:
        path = Path(ic.path)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return path

    sv = cfg.initial_v
    if sv.kind == "zero":
        v = VectorField.zeros(grid)
    elif sv.kind == "taylor_green":
        v = _taylor_green(grid, sv.amplitude)
    elif sv.kind == "random_band":
        v = random_band_velocity(grid, sv.max_mode, sv.amplitude, sv.seed)
    else:
        snap = load_snapshot(resolve_path(sv))
        if snap.grid.n != cfg.n:
            raise ConfigurationError(f"initial.v snapshot resolution {snap.grid.n} != configured n {cfg.n}")
        v = snap.v

    sp = cfg.initial_phi
    if sp.kind == "zero":
        phi = Field.constant(grid, sp.mean) if sp.mean != 0.0 else Field.zeros(grid)
    elif sp.kind == "random_band":
        phi = random_band_field(grid, sp.max_mode, sp.amplitude, sp.seed)
        if sp.mean != 0.0:
            phi = Field.from_physical(grid, phi.values + sp.mean)
    else:
        snap = load_snapshot(resolve_path(sp))
        if snap.grid.n != cfg.n:
            raise ConfigurationError(f"initial.phi snapshot resolution {snap.grid.n} != configured n {cfg.n}")
        phi = snap.phi

    return State(v=v, phi=phi, t=0.0)
