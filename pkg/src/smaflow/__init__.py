"""Pseudo-spectral simulator for incompressible smectic-A liquid crystal flow."""

__version__ = "0.1.0"

from .spectral import (
    ConfigurationError,
    Field,
    Grid,
    VectorField,
    dealias,
    deriv,
    divergence,
    gradient,
    hs_norm,
    l2_norm,
    laplacian,
    bilaplacian,
    leray_project,
    linf_norm,
    make_grid,
    random_band_field,
    random_band_velocity,
)
from .model import (
    DissipationSplit,
    Params,
    State,
    StressTensor,
    director,
    dissipation,
    elastic_force,
    penalty_F,
    penalty_f,
    q_force,
    total_energy,
    viscous_stress,
)
from .integrator import DivergenceError, StepConfig, Stepper, Trajectory, explicit_tendency, imex_step, run
from .equilibrium import (
    SteadyConfig,
    SteadyNonConvergence,
    UniquenessReport,
    poincare_constant,
    steady_solve,
    uniqueness_probe,
)
from .diagnostics import (
    DiagnosticsError,
    DiagnosticsRecord,
    RateFit,
    a_functional,
    convergence_report,
    default_alpha,
    energy_audit,
    fit_decay_rate,
)
from .config import RunConfig, build_state, export_config, load_config, resolve_config
from .io import SnapshotError, TimeseriesError, load_snapshot, read_timeseries, save_snapshot, write_timeseries
