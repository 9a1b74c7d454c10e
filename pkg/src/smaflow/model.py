"""Physics of the smectic-A flow system: director, penalty, forces, energy.

The evolved pair is (v, phi) with director d = grad(phi).  The penalty force
and potential are

    f(d) = (|d|^2 - 1) d / eps^2,        F(d) = (|d|^2 - 1)^2 / (4 eps^2),

the chemical force is Q = -K lap^2 phi + div f(d), the viscous stress is

    sigma_d = mu1 (d^T D(v) d) d x d + mu5 (D(v)d x d + d x D(v)d),

with D(v) = (grad v + grad v^T)/2, and the total energy is

    E = ||v||^2 / 2 + K ||lap phi||^2 / 2 + int F(d) dx.

Nonlinear products are formed pointwise in physical space and dealiased once
per composite term.  eps = inf switches the penalty off exactly (1/inf^2 = 0)
for linear verification runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import (
    ConfigurationError,
    Field,
    VectorField,
    bilaplacian,
    dealias,
    deriv,
    divergence,
    grad_norm_sq,
    gradient,
    l2_norm,
    laplacian,
)

__all__ = [
    "Params",
    "State",
    "StressTensor",
    "DissipationSplit",
    "director",
    "penalty_f",
    "penalty_F",
    "q_force",
    "viscous_stress",
    "elastic_force",
    "total_energy",
    "layer_energy",
    "dissipation",
]

ELASTIC_FORMS = ("q_times_d", "divergence_sigma_e")


@dataclass(frozen=True)
class Params:
    """Physical coefficients; sign constraints are enforced at construction.

    eps = inf is accepted as an explicit penalty-off switch for linear
    verification runs; otherwise 0 < eps <= 1.
    """

    mu1: float = 0.0
    mu4: float = 1.0
    mu5: float = 0.0
    K: float = 1.0
    lam: float = 1.0
    eps: float = 1.0

    def __post_init__(self):
        if not (self.mu1 >= 0.0):
            raise ConfigurationError(f"mu1 must be >= 0, got {self.mu1}")
        if not (self.mu4 > 0.0):
            raise ConfigurationError(f"mu4 must be > 0, got {self.mu4}")
        if not (self.mu5 >= 0.0):
            raise ConfigurationError(f"mu5 must be >= 0, got {self.mu5}")
        if not (self.K > 0.0):
            raise ConfigurationError(f"K must be > 0, got {self.K}")
        if not (self.lam > 0.0):
            raise ConfigurationError(f"lambda must be > 0, got {self.lam}")
        if not (0.0 < self.eps <= 1.0 or math.isinf(self.eps)):
            raise ConfigurationError(f"epsilon must lie in (0, 1] (or inf to disable the penalty), got {self.eps}")


@dataclass(frozen=True)
class State:
    """Solenoidal velocity, layer variable, and time."""

    v: VectorField
    phi: Field
    t: float = 0.0

    def __post_init__(self):
        if self.v.grid.n != self.phi.grid.n:
            raise ValueError("velocity and layer variable must share a grid")
        if not math.isfinite(self.t) or self.t < 0.0:
            raise ValueError(f"time must be finite and >= 0, got {self.t}")

    @property
    def grid(self):
        return self.phi.grid


@dataclass(frozen=True)
class StressTensor:
    s11: Field
    s12: Field
    s21: Field
    s22: Field


@dataclass(frozen=True)
class DissipationSplit:
    """The four nonnegative terms of the energy dissipation identity."""

    d_mu1: float
    d_mu4: float
    d_mu5: float
    d_q: float

    @property
    def total(self) -> float:
        return self.d_mu1 + self.d_mu4 + self.d_mu5 + self.d_q


def director(phi: Field) -> VectorField:
    """d = grad(phi): molecular orientation normal to the layers."""
    return gradient(phi)


def penalty_f(d: VectorField, eps: float, rule: str = "none") -> VectorField:
    """Penalty force f(d) = (|d|^2 - 1) d / eps^2, formed pointwise."""
    d1, d2 = d.c1.values, d.c2.values
    w = (d1 * d1 + d2 * d2 - 1.0) / eps**2
    g = d.grid
    return VectorField(
        dealias(Field.from_physical(g, w * d1), rule),
        dealias(Field.from_physical(g, w * d2), rule),
    )


def penalty_F(d: VectorField, eps: float) -> Field:
    """Penalty potential F(d) = (|d|^2 - 1)^2 / (4 eps^2)."""
    d1, d2 = d.c1.values, d.c2.values
    if math.isinf(eps):
        return Field.zeros(d.grid)
    w = d1 * d1 + d2 * d2 - 1.0
    return Field.from_physical(d.grid, w * w / (4.0 * eps**2))


def penalty_divergence(phi: Field, p: Params, rule: str = "two_thirds", *, d: VectorField | None = None) -> Field:
    """div f(grad phi) with the penalty dealiased once before the divergence."""
    if d is None:
        d = director(phi)
    return divergence(penalty_f(d, p.eps, rule))


def q_force(phi: Field, p: Params, rule: str = "two_thirds", *, d: VectorField | None = None) -> Field:
    """Chemical force Q = -K lap^2 phi + div f(grad phi)."""
    return (-p.K) * bilaplacian(phi) + penalty_divergence(phi, p, rule, d=d)


def _symmetric_gradient(v: VectorField) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Physical values of D(v) = (grad v + grad v^T)/2 as (D11, D12, D22)."""
    d11 = deriv(v.c1, 0, 1).values
    d22 = deriv(v.c2, 1, 1).values
    d12 = 0.5 * (deriv(v.c1, 1, 1).values + deriv(v.c2, 0, 1).values)
    return d11, d12, d22


def viscous_stress(
    v: VectorField,
    d: VectorField,
    p: Params,
    rule: str = "two_thirds",
    *,
    sym_grad: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None,
) -> StressTensor:
    """Anisotropic viscous stress sigma_d (the mu4 D(v) part is handled implicitly)."""
    g = v.grid
    d11, d12, d22 = sym_grad if sym_grad is not None else _symmetric_gradient(v)
    a1, a2 = d.c1.values, d.c2.values
    dtd = a1 * a1 * d11 + 2.0 * a1 * a2 * d12 + a2 * a2 * d22   # d^T D(v) d
    dd1 = d11 * a1 + d12 * a2                                    # (D(v) d)_1
    dd2 = d12 * a1 + d22 * a2

    def comp(i_val, j_val, dd_i, dd_j):
        return dealias(
            Field.from_physical(g, p.mu1 * dtd * i_val * j_val + p.mu5 * (dd_i * j_val + i_val * dd_j)),
            rule,
        )

    return StressTensor(
        s11=comp(a1, a1, dd1, dd1),
        s12=comp(a1, a2, dd1, dd2),
        s21=comp(a2, a1, dd2, dd1),
        s22=comp(a2, a2, dd2, dd2),
    )


def stress_divergence(t: StressTensor) -> VectorField:
    """(div sigma)_i = d_j sigma_ij (second-index divergence; sigma_d is symmetric)."""
    return VectorField(
        deriv(t.s11, 0, 1) + deriv(t.s12, 1, 1),
        deriv(t.s21, 0, 1) + deriv(t.s22, 1, 1),
    )


def elastic_force(
    phi: Field,
    p: Params,
    form: str = "q_times_d",
    rule: str = "two_thirds",
    *,
    d: VectorField | None = None,
    q: Field | None = None,
) -> VectorField:
    """Elastic forcing of the momentum equation.

    form 'q_times_d' returns -Q d (the rewritten momentum form; the pressure
    gradient it drops is removed by Leray projection).  form
    'divergence_sigma_e' assembles the Ericksen stress

        sigma_e_ij = -f_i d_j + K (d_i lap phi) d_j - K lap(phi) d_i d_j phi

    and returns its divergence over the first index.  The two agree after
    Leray projection: they differ by grad(F + K (lap phi)^2 / 2).
    """
    g = phi.grid
    if form == "q_times_d":
        if d is None:
            d = director(phi)
        if q is None:
            q = q_force(phi, p, rule, d=d)
        qv = q.values
        return VectorField(
            dealias(Field.from_physical(g, -qv * d.c1.values), rule),
            dealias(Field.from_physical(g, -qv * d.c2.values), rule),
        )
    if form == "divergence_sigma_e":
        if d is None:
            d = director(phi)
        f = penalty_f(d, p.eps, "none")
        lap = laplacian(phi)
        glap = gradient(lap)
        hess = (
            deriv(d.c1, 0, 1).values,    # phi_11
            deriv(d.c1, 1, 1).values,    # phi_12
            deriv(d.c2, 1, 1).values,    # phi_22
        )
        a = (d.c1.values, d.c2.values)
        fv = (f.c1.values, f.c2.values)
        gl = (glap.c1.values, glap.c2.values)
        lv = lap.values

        def sigma(i, j):
            hij = hess[i + j]            # (0,0)->phi_11, (0,1)/(1,0)->phi_12, (1,1)->phi_22
            val = -fv[i] * a[j] + p.K * gl[i] * a[j] - p.K * lv * hij
            return dealias(Field.from_physical(g, val), rule)

        s = [[sigma(i, j) for j in range(2)] for i in range(2)]
        return VectorField(
            deriv(s[0][0], 0, 1) + deriv(s[1][0], 1, 1),
            deriv(s[0][1], 0, 1) + deriv(s[1][1], 1, 1),
        )
    raise ConfigurationError(f"unknown elastic force form {form!r}; expected one of {ELASTIC_FORMS}")


def layer_energy(phi: Field, p: Params, *, d: VectorField | None = None) -> float:
    """K ||lap phi||^2 / 2 + int F(grad phi) dx."""
    g = phi.grid
    elastic = 0.5 * p.K * l2_norm(laplacian(phi)) ** 2
    fpen = penalty_F(d if d is not None else director(phi), p.eps)
    return elastic + g.cell_area * float(np.sum(fpen.values))


def total_energy(s: State, p: Params, *, d: VectorField | None = None) -> float:
    """Total energy E = ||v||^2 / 2 + K ||lap phi||^2 / 2 + int F dx."""
    return 0.5 * l2_norm(s.v) ** 2 + layer_energy(s.phi, p, d=d)


def dissipation(
    s: State,
    p: Params,
    rule: str = "two_thirds",
    *,
    d: VectorField | None = None,
    sym_grad: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None,
    q: Field | None = None,
) -> DissipationSplit:
    """The four dissipation terms of the energy law, each nonnegative."""
    g = s.grid
    if d is None:
        d = director(s.phi)
    d11, d12, d22 = sym_grad if sym_grad is not None else _symmetric_gradient(s.v)
    a1, a2 = d.c1.values, d.c2.values
    dtd = a1 * a1 * d11 + 2.0 * a1 * a2 * d12 + a2 * a2 * d22
    dd1 = d11 * a1 + d12 * a2
    dd2 = d12 * a1 + d22 * a2
    if q is None:
        q = q_force(s.phi, p, rule, d=d)
    return DissipationSplit(
        d_mu1=p.mu1 * g.cell_area * float(np.sum(dtd * dtd)),
        d_mu4=0.5 * p.mu4 * grad_norm_sq(s.v),
        d_mu5=2.0 * p.mu5 * g.cell_area * float(np.sum(dd1 * dd1 + dd2 * dd2)),
        d_q=p.lam * l2_norm(q) ** 2,
    )
