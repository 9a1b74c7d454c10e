"""Energy-law auditing, the higher-order functional, and decay-rate fitting.

The audit checks the discrete counterpart of the dissipation identity
dE/dt = -(D_mu1 + D_mu4 + D_mu5 + D_Q).  Its residual over a record pair is

    r_m = (E_{m+1} - E_m) / dt + D,

with D the dissipation at t_m (stencil 'forward', first-order consistent) or
the average of the endpoint dissipations (stencil 'trapezoid', second-order
consistent; use it when auditing the two-step scheme).

The decay fitter regresses log(value) against both log(1+t) (algebraic decay
(1+t)^{-p}) and t (exponential), keeps the model with the higher r^2, and for
algebraic decay reports the implied exponent theta = p / (1 + 2p) of the rate
law (1+t)^{-theta/(1-2theta)}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .model import Params, State, director, dissipation, q_force, total_energy
from .spectral import Field, grad_norm_sq, hs_norm, l2_norm, linf_norm

if TYPE_CHECKING:  # pragma: no cover
    from .integrator import Trajectory

__all__ = [
    "DiagnosticsRecord",
    "RateFit",
    "EnergyAudit",
    "ConvergenceReport",
    "DiagnosticsError",
    "a_functional",
    "default_alpha",
    "compute_record",
    "energy_audit",
    "fit_decay_rate",
    "convergence_report",
]


class DiagnosticsError(ValueError):
    """Malformed input to a diagnostic (spacing, window, or sign problems)."""


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Per-step scalars; field names double as the time-series column names."""

    t: float
    E: float
    D_mu1: float
    D_mu4: float
    D_mu5: float
    D_Q: float
    grad_v_l2: float
    q_l2: float
    A: float
    mean_v1: float
    mean_v2: float
    mean_phi: float
    phi_h2: float

    @property
    def dissipation_total(self) -> float:
        return self.D_mu1 + self.D_mu4 + self.D_mu5 + self.D_Q


@dataclass(frozen=True)
class RateFit:
    """Least-squares decay fit of a positive time series on a window."""

    model: str                     # "algebraic" or "exponential"
    exponent: float                # p in (1+t)^{-p}, or the exponential rate
    theta_implied: float | None    # theta = p/(1+2p) for algebraic decay
    fit_window: tuple[float, float]
    r_squared: float


@dataclass(frozen=True)
class EnergyAudit:
    times: np.ndarray
    residuals: np.ndarray
    max_abs: float
    mean_abs: float


@dataclass(frozen=True)
class ConvergenceReport:
    times: np.ndarray
    v_h1: np.ndarray
    phi_h4_dist: np.ndarray
    final_v_h1: float
    final_phi_h4_dist: float
    fit_v: RateFit | None
    fit_phi: RateFit | None


def a_functional(s: State, p: Params, alpha: float, rule: str = "two_thirds") -> float:
    """||grad v||^2 + alpha ||Q||^2."""
    if not alpha > 0.0:
        raise DiagnosticsError(f"alpha must be > 0, got {alpha}")
    return grad_norm_sq(s.v) + alpha * l2_norm(q_force(s.phi, p, rule)) ** 2


def default_alpha(s: State, p: Params) -> float:
    """alpha = lam mu4 / (16 K M^2) with M = max(1, ||grad phi||_inf)."""
    m = max(1.0, linf_norm(director(s.phi)))
    return p.lam * p.mu4 / (16.0 * p.K * m**2)


def compute_record(
    s: State,
    p: Params,
    alpha: float,
    rule: str = "two_thirds",
    *,
    d=None,
    sym_grad=None,
    q=None,
) -> DiagnosticsRecord:
    split = dissipation(s, p, rule, d=d, sym_grad=sym_grad, q=q)
    gsq = grad_norm_sq(s.v)
    q_l2 = math.sqrt(split.d_q / p.lam)
    return DiagnosticsRecord(
        t=s.t,
        E=total_energy(s, p, d=d),
        D_mu1=split.d_mu1,
        D_mu4=split.d_mu4,
        D_mu5=split.d_mu5,
        D_Q=split.d_q,
        grad_v_l2=math.sqrt(gsq),
        q_l2=q_l2,
        A=gsq + alpha * q_l2**2,
        mean_v1=s.v.c1.mean,
        mean_v2=s.v.c2.mean,
        mean_phi=s.phi.mean,
        phi_h2=hs_norm(s.phi, 2),
    )


def _records(traj_or_records) -> list[DiagnosticsRecord]:
    records = getattr(traj_or_records, "records", traj_or_records)
    return list(records)


def energy_audit(traj_or_records, stencil: str = "forward") -> EnergyAudit:
    """Residual series of the discrete energy law over uniformly spaced records."""
    records = _records(traj_or_records)
    if len(records) < 2:
        raise DiagnosticsError("energy audit needs at least 2 records")
    if stencil not in ("forward", "trapezoid"):
        raise DiagnosticsError(f"unknown audit stencil {stencil!r}")
    t = np.array([r.t for r in records])
    dts = np.diff(t)
    dt = dts[0]
    if dt <= 0 or np.any(np.abs(dts - dt) > 1e-9 * max(dt, 1.0)):
        raise DiagnosticsError("energy audit requires uniformly spaced records")
    e = np.array([r.E for r in records])
    d = np.array([r.dissipation_total for r in records])
    if stencil == "forward":
        r = (e[1:] - e[:-1]) / dt + d[:-1]
    else:
        r = (e[1:] - e[:-1]) / dt + 0.5 * (d[:-1] + d[1:])
    return EnergyAudit(
        times=t[:-1],
        residuals=r,
        max_abs=float(np.max(np.abs(r))),
        mean_abs=float(np.mean(np.abs(r))),
    )


def _linfit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares slope and r^2 of y against x."""
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res <= 1e-300 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return float(slope), r2


def fit_decay_rate(times: Sequence[float], values: Sequence[float], window: tuple[float, float]) -> RateFit:
    """Fit a decaying series on [t_a, t_b]; needs >= 10 strictly positive points."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.shape != v.shape:
        raise DiagnosticsError("times and values must have matching shapes")
    a, b = float(window[0]), float(window[1])
    if not (b > a):
        raise DiagnosticsError(f"degenerate fit window [{a}, {b}]")
    sel = (t >= a) & (t <= b)
    if int(np.count_nonzero(sel)) < 10:
        raise DiagnosticsError(f"fit window [{a}, {b}] holds {int(np.count_nonzero(sel))} points; need >= 10")
    tw, vw = t[sel], v[sel]
    if np.any(vw <= 0.0):
        raise DiagnosticsError("fit values must be strictly positive on the window")
    logv = np.log(vw)
    slope_alg, r2_alg = _linfit(np.log1p(tw), logv)
    slope_exp, r2_exp = _linfit(tw, logv)
    if r2_alg > r2_exp:
        p = -slope_alg
        theta = p / (1.0 + 2.0 * p) if p > 0 else None
        return RateFit("algebraic", float(p), theta, (a, b), r2_alg)
    return RateFit("exponential", float(-slope_exp), None, (a, b), r2_exp)


def tail_fit(times: np.ndarray, values: np.ndarray, fraction: float = 0.5) -> RateFit | None:
    """Fit the trailing part of a series where values stay positive; None if too short."""
    pos = values > 0.0
    if int(np.count_nonzero(pos)) < 10:
        return None
    t_pos = times[pos]
    a = t_pos[0] + fraction * (t_pos[-1] - t_pos[0])
    sel = (times >= a) & pos
    if int(np.count_nonzero(sel)) < 10:
        a = t_pos[max(0, len(t_pos) - 10)]
        sel = (times >= a) & pos
    if int(np.count_nonzero(sel)) < 10:
        return None
    return fit_decay_rate(times[sel], values[sel], (float(times[sel][0]), float(times[sel][-1])))


def convergence_report(traj: "Trajectory", phi_inf: Field) -> ConvergenceReport:
    """Track ||v||_H1 and ||phi - phi_inf||_H4 along the trajectory snapshots."""
    snaps = traj.snapshots
    if not snaps:
        raise DiagnosticsError("trajectory carries no snapshots")
    mean0 = snaps[0][1].phi.mean
    if abs(mean0 - phi_inf.mean) > 1e-8:
        raise DiagnosticsError(
            f"mean mismatch: trajectory phi mean {mean0!r} vs equilibrium mean {phi_inf.mean!r}"
        )
    times = np.array([t for t, _ in snaps])
    v_h1 = np.array([hs_norm(s.v, 1) for _, s in snaps])
    dist = np.array([hs_norm(s.phi - phi_inf, 4) for _, s in snaps])
    return ConvergenceReport(
        times=times,
        v_h1=v_h1,
        phi_h4_dist=dist,
        final_v_h1=float(v_h1[-1]),
        final_phi_h4_dist=float(dist[-1]),
        fit_v=tail_fit(times, v_h1),
        fit_phi=tail_fit(times, dist),
    )
