"""IMEX time stepping: stiff linear terms implicit, transport and penalty explicit.

Scheme imex1 advances each spectral mode by

    v+ = (v + dt N_v) / (1 + dt (mu4/2) |k|^2),    then Leray projection,
    phi+ = (phi + dt N_phi) / (1 + dt lam K |k|^4),

with N_v = P(-(v.grad)v + div sigma_d - Q d) and N_phi = -v.grad phi
+ lam div f(d).  Scheme imex2 extrapolates the explicit terms with
coefficients (3/2, -1/2) and treats the linear terms with trapezoidal
weights; its first step falls back to imex1.

The k = 0 modes are pinned exactly (mean conservation), and states are handed
between steps in physical form so that a snapshot/resume round trip is
bit-exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .diagnostics import DiagnosticsRecord, compute_record, default_alpha
from .model import Params, State, director, elastic_force, q_force, viscous_stress, stress_divergence
from .spectral import (
    ConfigurationError,
    Field,
    VectorField,
    bilaplacian,
    dealias,
    deriv,
    leray_project,
)

__all__ = [
    "StepConfig",
    "Trajectory",
    "DivergenceError",
    "explicit_tendency",
    "imex_step",
    "Stepper",
    "run",
]

SCHEMES = ("imex1", "imex2")


@dataclass(frozen=True)
class StepConfig:
    dt: float
    t_end: float
    scheme: str = "imex1"
    dealias: str = "two_thirds"
    snapshot_every: int = 1000
    diag_every: int = 1

    def __post_init__(self):
        if not (self.dt > 0.0):
            raise ConfigurationError(f"dt must be > 0, got {self.dt}")
        if not (self.t_end >= 0.0):
            raise ConfigurationError(f"t_end must be >= 0, got {self.t_end}")
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.snapshot_every < 1:
            raise ConfigurationError(f"snapshot_every must be >= 1, got {self.snapshot_every}")
        if self.diag_every < 1:
            raise ConfigurationError(f"diag_every must be >= 1, got {self.diag_every}")


@dataclass
class Trajectory:
    """Per-run diagnostics records plus sparse state snapshots."""

    records: list[DiagnosticsRecord] = field(default_factory=list)
    snapshots: list[tuple[float, State]] = field(default_factory=list)

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])


class DivergenceError(RuntimeError):
    """Non-finite value during stepping; carries the step index and norm."""

    def __init__(self, step_index: int, what: str, value: float, trajectory: Trajectory | None = None):
        super().__init__(f"non-finite state at step {step_index}: linf({what}) = {value}")
        self.step_index = step_index
        self.what = what
        self.value = value
        self.trajectory = trajectory


@dataclass
class _Shared:
    """Intermediates reused between the tendency and the diagnostics record."""

    d: VectorField
    sym_grad: tuple
    q: Field


def _tendency(s: State, p: Params, rule: str) -> tuple[VectorField, Field, _Shared]:
    g = s.grid
    v, phi = s.v, s.phi
    v1, v2 = v.c1.values, v.c2.values

    dv11 = deriv(v.c1, 0, 1).values
    dv12 = deriv(v.c1, 1, 1).values
    dv21 = deriv(v.c2, 0, 1).values
    dv22 = deriv(v.c2, 1, 1).values
    adv = VectorField(
        dealias(Field.from_physical(g, v1 * dv11 + v2 * dv12), rule),
        dealias(Field.from_physical(g, v1 * dv21 + v2 * dv22), rule),
    )
    sym_grad = (dv11, 0.5 * (dv12 + dv21), dv22)
    d = director(phi)
    q = q_force(phi, p, rule, d=d)
    sig = viscous_stress(v, d, p, rule, sym_grad=sym_grad)
    elastic = elastic_force(phi, p, "q_times_d", rule, d=d, q=q)
    n_v = leray_project(stress_divergence(sig) + elastic - adv)

    conv = dealias(Field.from_physical(g, v1 * d.c1.values + v2 * d.c2.values), rule)
    n_phi = p.lam * (q + p.K * bilaplacian(phi)) - conv
    return n_v, n_phi, _Shared(d=d, sym_grad=sym_grad, q=q)


def explicit_tendency(s: State, p: Params, rule: str = "two_thirds") -> tuple[VectorField, Field]:
    """Explicit (non-stiff) tendencies; the implicit diffusion terms are excluded."""
    n_v, n_phi, _ = _tendency(s, p, rule)
    return n_v, n_phi


def _check_finite(step_index: int, pairs, trajectory=None):
    for what, arr in pairs:
        m = float(np.max(np.abs(arr)))
        if not np.isfinite(m):
            raise DivergenceError(step_index, what, m, trajectory)


class Stepper:
    """Stateful driver holding the previous tendency for the two-step scheme."""

    def __init__(self, p: Params, c: StepConfig):
        self.p = p
        self.c = c
        self._prev: tuple[VectorField, Field] | None = None

    def reset(self):
        self._prev = None

    def step(self, s: State, step_index: int = 0, trajectory: Trajectory | None = None) -> State:
        n_v, n_phi, _ = _tendency(s, self.p, self.c.dealias)
        return self.advance(s, n_v, n_phi, step_index, trajectory)

    def advance(
        self,
        s: State,
        n_v: VectorField,
        n_phi: Field,
        step_index: int = 0,
        trajectory: Trajectory | None = None,
    ) -> State:
        p, c = self.p, self.c
        g = s.grid
        _check_finite(step_index, [("v1", s.v.c1.values), ("v2", s.v.c2.values), ("phi", s.phi.values)], trajectory)

        b_v = c.dt * 0.5 * p.mu4 * g.k_sq
        b_phi = c.dt * p.lam * p.K * g.k_sq**2

        if c.scheme == "imex2" and self._prev is not None:
            pv, pphi = self._prev
            ev1 = 1.5 * n_v.c1.coeffs - 0.5 * pv.c1.coeffs
            ev2 = 1.5 * n_v.c2.coeffs - 0.5 * pv.c2.coeffs
            ephi = 1.5 * n_phi.coeffs - 0.5 * pphi.coeffs
            v1 = ((1.0 - 0.5 * b_v) * s.v.c1.coeffs + c.dt * ev1) / (1.0 + 0.5 * b_v)
            v2 = ((1.0 - 0.5 * b_v) * s.v.c2.coeffs + c.dt * ev2) / (1.0 + 0.5 * b_v)
            phi = ((1.0 - 0.5 * b_phi) * s.phi.coeffs + c.dt * ephi) / (1.0 + 0.5 * b_phi)
        else:
            v1 = (s.v.c1.coeffs + c.dt * n_v.c1.coeffs) / (1.0 + b_v)
            v2 = (s.v.c2.coeffs + c.dt * n_v.c2.coeffs) / (1.0 + b_v)
            phi = (s.phi.coeffs + c.dt * n_phi.coeffs) / (1.0 + b_phi)
        if c.scheme == "imex2":
            self._prev = (n_v, n_phi)

        v_new = leray_project(VectorField(Field.from_spectral(g, v1), Field.from_spectral(g, v2)))
        # Pin the k = 0 modes exactly: means are conserved by the equations.
        c1 = np.array(v_new.c1.coeffs)
        c2 = np.array(v_new.c2.coeffs)
        cp = np.array(phi)
        c1[0, 0] = s.v.c1.coeffs[0, 0]
        c2[0, 0] = s.v.c2.coeffs[0, 0]
        cp[0, 0] = s.phi.coeffs[0, 0]

        out = State(
            v=VectorField(Field.from_spectral(g, c1), Field.from_spectral(g, c2)).drop_spectral(),
            phi=Field.from_spectral(g, cp).drop_spectral(),
            t=s.t + c.dt,
        )
        _check_finite(step_index, [("v1", out.v.c1.values), ("v2", out.v.c2.values), ("phi", out.phi.values)], trajectory)
        return out


def imex_step(s: State, p: Params, c: StepConfig) -> State:
    """One stateless step (imex2 without history falls back to imex1)."""
    return Stepper(p, c).step(s)


def run(s0: State, p: Params, c: StepConfig, alpha: float | None = None) -> Trajectory:
    """Step from s0 until t >= t_end, emitting diagnostics and snapshots.

    Diagnostics records are spaced uniformly (every diag_every steps); the
    final state is always snapshotted.  A non-finite value raises
    DivergenceError with the partial trajectory attached.
    """
    if alpha is None:
        alpha = default_alpha(s0, p)
    traj = Trajectory()
    traj.snapshots.append((s0.t, s0))

    span = c.t_end - s0.t
    total = 0 if span <= 0 else int(np.ceil(span / c.dt - 1e-9))
    stepper = Stepper(p, c)
    s = s0
    for m in range(total):
        n_v, n_phi, shared = _tendency(s, p, c.dealias)
        if m % c.diag_every == 0:
            traj.records.append(compute_record(s, p, alpha, c.dealias,
                                               d=shared.d, sym_grad=shared.sym_grad, q=shared.q))
        s = stepper.advance(s, n_v, n_phi, step_index=m + 1, trajectory=traj)
        if (m + 1) % c.snapshot_every == 0:
            traj.snapshots.append((s.t, s))
    if total % c.diag_every == 0:
        traj.records.append(compute_record(s, p, alpha, c.dealias))
    if not traj.snapshots or traj.snapshots[-1][0] < s.t:
        traj.snapshots.append((s.t, s))
    return traj
