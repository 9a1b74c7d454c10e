"""Stationary states of the layer equation by pseudo-time gradient flow.

The stationary problem is -K lap^2 phi + div f(grad phi) = 0 with prescribed
mean.  It is solved by evolving phi_t = lam Q(phi) with the bilaplacian
implicit (as in imex1) and an adaptive pseudo-time step: doubled after each
energy-decreasing step, halved on an energy increase.  The k = 0 coefficient
is never touched, so the mean is preserved bit-exactly.

When eps > C_P K^{-1/2} (C_P = 1/(2 pi) on the unit torus) the stationary
solution with a given mean is unique; the uniqueness probe runs the solver
from independent random seeds and reports pairwise distances against that
threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Params, director, layer_energy, penalty_divergence, q_force
from .spectral import ConfigurationError, Field, Grid, l2_norm, linf_norm, make_grid, random_band_field

__all__ = [
    "SteadyConfig",
    "SteadyNonConvergence",
    "UniquenessReport",
    "steady_solve",
    "poincare_constant",
    "uniqueness_probe",
]


@dataclass(frozen=True)
class SteadyConfig:
    tol: float = 1e-10
    dt0: float = 1e-6
    max_iters: int = 20000
    mean: float | None = None
    dealias: str = "two_thirds"

    def __post_init__(self):
        if not (self.tol > 0.0):
            raise ConfigurationError(f"tol must be > 0, got {self.tol}")
        if not (self.dt0 > 0.0):
            raise ConfigurationError(f"dt0 must be > 0, got {self.dt0}")
        if self.max_iters < 1:
            raise ConfigurationError(f"max_iters must be >= 1, got {self.max_iters}")


class SteadyNonConvergence(RuntimeError):
    """Residual target not reached within max_iters."""

    def __init__(self, residual: float, history: list[float]):
        super().__init__(f"steady solve did not converge: final residual {residual:.3e} "
                         f"after {len(history) - 1} accepted steps")
        self.residual = residual
        self.history = history


@dataclass(frozen=True)
class UniquenessReport:
    eps: float
    K: float
    threshold_value: float          # C_P K^{-1/2}
    threshold_satisfied: bool       # eps > C_P K^{-1/2}
    seeds: tuple[int, ...]
    converged: tuple[bool, ...]
    residuals: tuple[float, ...]
    distances: tuple[tuple[int, int, float], ...]
    max_distance: float
    all_converged: bool


_DT_MAX = 1e12


def steady_solve(
    phi0: Field,
    p: Params,
    c: SteadyConfig | None = None,
    on_accept=None,
) -> tuple[Field, list[float]]:
    """Gradient-flow solve of the stationary problem from phi0.

    Returns the converged field (same mean as phi0) and the residual history
    ||Q|| per accepted iterate.  Raises SteadyNonConvergence when the trial
    budget is exhausted.  on_accept(phi, energy, residual), when given, is
    invoked after every accepted step.
    """
    if c is None:
        c = SteadyConfig()
    g = phi0.grid
    coeffs = np.array(phi0.coeffs)
    if c.mean is not None:
        coeffs[0, 0] = complex(c.mean)
    k0 = coeffs[0, 0]
    denom_base = p.lam * p.K * g.k_sq**2

    phi = Field.from_spectral(g, coeffs)
    d = director(phi)
    res = l2_norm(q_force(phi, p, c.dealias, d=d))
    history = [res]
    energy = layer_energy(phi, p, d=d)
    dtau = c.dt0
    trials = 0
    while res > c.tol:
        if trials >= c.max_iters:
            raise SteadyNonConvergence(res, history)
        trials += 1
        # Linear stabilization shift, implicit alongside the bilaplacian: it
        # majorizes the penalty Jacobian so large pseudo-time steps survive
        # the energy-acceptance check.  Fixed points are unchanged (the same
        # S |k|^2 phi is added on both sides).
        shift = (3.0 * linf_norm(d) ** 2 + 1.0) / p.eps**2
        pen = penalty_divergence(phi, p, c.dealias, d=d).coeffs
        numer = phi.coeffs * (1.0 + dtau * p.lam * shift * g.k_sq) + dtau * p.lam * pen
        trial_coeffs = np.array(numer / (1.0 + dtau * (denom_base + p.lam * shift * g.k_sq)))
        trial_coeffs[0, 0] = k0
        trial = Field.from_spectral(g, trial_coeffs)
        trial_d = director(trial)
        trial_energy = layer_energy(trial, p, d=trial_d)
        # Roundoff allowance: near convergence the true energy decrease per
        # step drops below the last ulp of E; without slack the adaptation
        # dithers on noise and the residual stalls.
        slack = 4.0 * np.finfo(float).eps * (1.0 + abs(energy))
        if math.isfinite(trial_energy) and trial_energy <= energy + slack:
            phi, energy, d = trial, trial_energy, trial_d
            dtau = min(dtau * 2.0, _DT_MAX)
            res = l2_norm(q_force(phi, p, c.dealias, d=d))
            history.append(res)
            if on_accept is not None:
                on_accept(phi, energy, res)
        else:
            dtau *= 0.5
    return phi, history


def poincare_constant(grid: Grid) -> float:
    """Best constant in ||phi|| <= C_P ||grad phi|| for zero-mean fields: 1/(2 pi)."""
    return 1.0 / (2.0 * np.pi)


def uniqueness_probe(
    p: Params,
    seeds: list[int],
    mean: float = 0.0,
    n: int = 32,
    c: SteadyConfig | None = None,
    max_mode: int = 4,
    amplitude: float = 0.1,
) -> UniquenessReport:
    """Run steady_solve from independent random fields and compare the limits."""
    if len(seeds) < 2:
        raise ConfigurationError(f"uniqueness probe needs >= 2 seeds, got {len(seeds)}")
    if c is None:
        c = SteadyConfig(mean=mean)
    g = make_grid(n)
    results: list[Field | None] = []
    converged: list[bool] = []
    residuals: list[float] = []
    for seed in seeds:
        phi0 = Field.from_physical(g, random_band_field(g, max_mode, amplitude, seed).values + mean)
        try:
            phi_inf, history = steady_solve(phi0, p, c)
            results.append(phi_inf)
            converged.append(True)
            residuals.append(history[-1])
        except SteadyNonConvergence as err:
            results.append(None)
            converged.append(False)
            residuals.append(err.residual)

    distances = []
    for i in range(len(seeds)):
        for j in range(i + 1, len(seeds)):
            if results[i] is not None and results[j] is not None:
                distances.append((seeds[i], seeds[j], l2_norm(results[i] - results[j])))
    threshold = poincare_constant(g) / math.sqrt(p.K)
    return UniquenessReport(
        eps=p.eps,
        K=p.K,
        threshold_value=threshold,
        threshold_satisfied=p.eps > threshold,
        seeds=tuple(seeds),
        converged=tuple(converged),
        residuals=tuple(residuals),
        distances=tuple(distances),
        max_distance=max((d for _, _, d in distances), default=float("nan")),
        all_converged=all(converged),
    )
