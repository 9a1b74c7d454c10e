"""Fourier substrate on the unit torus: grid, transforms, multipliers, projection.

All fields live on the square periodic domain [0,1)^2 sampled on an n x n
lattice.  The forward transform is normalized by 1/n^2, so the coefficient at
k = 0 equals the field mean.  Wavenumber tables follow the transform-order
convention 2*pi*{0, 1, ..., n/2, -n/2+1, ..., -1} with the Nyquist entry kept
positive; odd-order derivatives zero the Nyquist mode so real fields stay real.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from scipy import fft as _sfft

__all__ = [
    "ConfigurationError",
    "DEALIAS_RULES",
    "Grid",
    "Field",
    "VectorField",
    "make_grid",
    "deriv",
    "gradient",
    "divergence",
    "laplacian",
    "bilaplacian",
    "dealias",
    "leray_project",
    "l2_norm",
    "hs_norm",
    "linf_norm",
    "grad_norm_sq",
    "random_band_field",
    "random_band_velocity",
]

DEALIAS_RULES = ("two_thirds", "half", "none")


class ConfigurationError(ValueError):
    """Invalid grid size, parameter value, or configuration input."""


_CPU_COUNT = os.cpu_count() or 1


def fft_workers() -> int:
    """Worker count for the transforms, from SMAFLOW_THREADS (default: all cores)."""
    env = os.environ.get("SMAFLOW_THREADS")
    if env:
        try:
            w = int(env)
        except ValueError:
            raise ConfigurationError(f"SMAFLOW_THREADS must be an integer, got {env!r}") from None
        if w < 1:
            raise ConfigurationError(f"SMAFLOW_THREADS must be >= 1, got {w}")
        return w
    return _CPU_COUNT


def _locked(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Grid:
    """Immutable torus discretization with precomputed wavenumber tables.

    k1/k2 are the broadcastable physical wavenumbers (Nyquist positive);
    kd1/kd2 are the derivative tables with the Nyquist entry zeroed, used by
    odd-order derivatives and the Leray projector.
    """

    n: int
    k1: np.ndarray          # shape (n, 1)
    k2: np.ndarray          # shape (1, n)
    kd1: np.ndarray         # Nyquist-zeroed variant of k1
    kd2: np.ndarray
    k_sq: np.ndarray        # |k|^2, shape (n, n)
    index1: np.ndarray      # integer mode indices, shape (n, 1)
    index2: np.ndarray      # shape (1, n)
    x1: np.ndarray          # node coordinates, shape (n, 1)
    x2: np.ndarray          # shape (1, n)
    cell_area: float
    two_thirds_mask: np.ndarray
    half_mask: np.ndarray

    dim = 2
    period = 1.0

    def dealias_mask(self, rule: str) -> np.ndarray | None:
        """Boolean keep-mask for the given rule, or None for 'none'."""
        if rule == "two_thirds":
            return self.two_thirds_mask
        if rule == "half":
            return self.half_mask
        if rule == "none":
            return None
        raise ConfigurationError(f"unknown dealias rule {rule!r}; expected one of {DEALIAS_RULES}")


def make_grid(n: int) -> Grid:
    """Build the n x n grid; n must be a power of two in [8, 1024]."""
    if not isinstance(n, (int, np.integer)):
        raise ConfigurationError(f"grid resolution must be an integer, got {n!r}")
    n = int(n)
    if n < 8 or n > 1024:
        raise ConfigurationError(f"grid resolution must satisfy 8 <= n <= 1024, got {n}")
    if n & (n - 1) != 0:
        raise ConfigurationError(f"grid resolution must be a power of two, got {n}")

    idx = np.fft.fftfreq(n, d=1.0 / n)
    idx[n // 2] = n // 2          # transform-order convention with positive Nyquist
    k = 2.0 * np.pi * idx
    kd = k.copy()
    kd[n // 2] = 0.0

    k1 = k.reshape(n, 1)
    k2 = k.reshape(1, n)
    x = np.arange(n) / n
    index1 = idx.reshape(n, 1).astype(int)
    index2 = idx.reshape(1, n).astype(int)
    top = np.maximum(np.abs(index1), np.abs(index2))
    grid = Grid(
        n=n,
        k1=_locked(k1),
        k2=_locked(k2.copy()),
        kd1=_locked(kd.reshape(n, 1)),
        kd2=_locked(kd.reshape(1, n).copy()),
        k_sq=_locked(k1**2 + k2**2),
        index1=_locked(index1),
        index2=_locked(index2),
        x1=_locked(x.reshape(n, 1)),
        x2=_locked(x.reshape(1, n).copy()),
        cell_area=1.0 / n**2,
        two_thirds_mask=_locked(top <= n // 3),
        half_mask=_locked(top <= n // 4),
    )
    return grid


class Field:
    """Real scalar field with lazily synchronized physical/spectral data.

    Both representations are cached once computed; instances are treated as
    immutable (arrays are write-locked).  Inter-step state handoff uses the
    physical representation as canonical so that snapshot round trips are
    bit-exact.
    """

    __slots__ = ("grid", "_phys", "_spec")

    def __init__(self, grid: Grid, phys: np.ndarray | None = None, spec: np.ndarray | None = None):
        if phys is None and spec is None:
            raise ValueError("Field needs physical or spectral data")
        self.grid = grid
        self._phys = phys
        self._spec = spec

    @classmethod
    def from_physical(cls, grid: Grid, values: np.ndarray) -> "Field":
        a = np.array(values, dtype=float)
        if a.shape != (grid.n, grid.n):
            raise ValueError(f"expected shape {(grid.n, grid.n)}, got {a.shape}")
        return cls(grid, phys=_locked(a))

    @classmethod
    def from_spectral(cls, grid: Grid, coeffs: np.ndarray) -> "Field":
        a = np.array(coeffs, dtype=complex)
        if a.shape != (grid.n, grid.n):
            raise ValueError(f"expected shape {(grid.n, grid.n)}, got {a.shape}")
        return cls(grid, spec=_locked(a))

    @classmethod
    def zeros(cls, grid: Grid) -> "Field":
        return cls.from_physical(grid, np.zeros((grid.n, grid.n)))

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "Field":
        return cls.from_physical(grid, np.full((grid.n, grid.n), float(value)))

    @property
    def values(self) -> np.ndarray:
        """Physical node values (real part of the inverse transform)."""
        if self._phys is None:
            self._phys = _locked(np.real(inverse_transform(self._spec)))
        return self._phys

    @property
    def coeffs(self) -> np.ndarray:
        """Spectral coefficients, forward-normalized (k=0 entry is the mean)."""
        if self._spec is None:
            self._spec = _locked(forward_transform(self._phys))
        return self._spec

    @property
    def mean(self) -> float:
        return float(self.coeffs[0, 0].real)

    def drop_spectral(self) -> "Field":
        """Field carrying only the physical data (canonical inter-step form)."""
        return Field(self.grid, phys=self.values)

    # Linear combinations act in spectral space; pointwise products are
    # formed explicitly on .values by callers.
    def __add__(self, other: "Field") -> "Field":
        return Field.from_spectral(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "Field") -> "Field":
        return Field.from_spectral(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "Field":
        return Field.from_spectral(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return self * (-1.0)


class VectorField:
    """Two-component field (velocity or director)."""

    __slots__ = ("c1", "c2")

    def __init__(self, c1: Field, c2: Field):
        if c1.grid.n != c2.grid.n:
            raise ValueError("components must share a grid")
        self.c1 = c1
        self.c2 = c2

    @property
    def grid(self) -> Grid:
        return self.c1.grid

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls(Field.zeros(grid), Field.zeros(grid))

    def drop_spectral(self) -> "VectorField":
        return VectorField(self.c1.drop_spectral(), self.c2.drop_spectral())

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.c1 + other.c1, self.c2 + other.c2)

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.c1 - other.c1, self.c2 - other.c2)

    def __mul__(self, scalar: float) -> "VectorField":
        return VectorField(self.c1 * scalar, self.c2 * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "VectorField":
        return self * (-1.0)


def forward_transform(values: np.ndarray) -> np.ndarray:
    return _sfft.fft2(values, norm="forward", workers=fft_workers())


def inverse_transform(coeffs: np.ndarray) -> np.ndarray:
    return _sfft.ifft2(coeffs, norm="forward", workers=fft_workers())


def deriv(f: Field, axis: int, order: int) -> Field:
    """Spectral derivative along axis 0 (x1) or 1 (x2) of the given order."""
    if axis not in (0, 1):
        raise ConfigurationError(f"axis must be 0 or 1, got {axis}")
    if not isinstance(order, (int, np.integer)) or order < 1:
        raise ConfigurationError(f"derivative order must be a positive integer, got {order}")
    g = f.grid
    if order % 2 == 1:
        k = g.kd1 if axis == 0 else g.kd2
    else:
        k = g.k1 if axis == 0 else g.k2
    return Field.from_spectral(g, f.coeffs * (1j * k) ** order)


def gradient(f: Field) -> VectorField:
    return VectorField(deriv(f, 0, 1), deriv(f, 1, 1))


def divergence(u: VectorField) -> Field:
    return deriv(u.c1, 0, 1) + deriv(u.c2, 1, 1)


def laplacian(f: Field) -> Field:
    return Field.from_spectral(f.grid, -f.grid.k_sq * f.coeffs)


def bilaplacian(f: Field) -> Field:
    return Field.from_spectral(f.grid, f.grid.k_sq**2 * f.coeffs)


def dealias(f: Field, rule: str = "two_thirds") -> Field:
    """Zero coefficients with max(|index1|, |index2|) above the rule's cutoff."""
    mask = f.grid.dealias_mask(rule)
    if mask is None:
        return f
    return Field.from_spectral(f.grid, f.coeffs * mask)


def leray_project(u: VectorField) -> VectorField:
    """Project onto divergence-free fields: u_hat -= k (k . u_hat) / |k|^2.

    Uses the Nyquist-zeroed derivative wavenumbers, consistent with the
    discrete divergence; the k = 0 mode (mean velocity) is unchanged.
    """
    g = u.grid
    k1, k2 = g.kd1, g.kd2
    ksq = k1**2 + k2**2
    safe = np.where(ksq == 0.0, 1.0, ksq)
    c1, c2 = u.c1.coeffs, u.c2.coeffs
    kd = (k1 * c1 + k2 * c2) / safe
    return VectorField(
        Field.from_spectral(g, c1 - k1 * kd),
        Field.from_spectral(g, c2 - k2 * kd),
    )


def l2_norm(f: Field | VectorField) -> float:
    """L2 norm on the unit torus via Parseval on the spectral data."""
    if isinstance(f, VectorField):
        return float(np.sqrt(np.sum(np.abs(f.c1.coeffs) ** 2) + np.sum(np.abs(f.c2.coeffs) ** 2)))
    return float(np.sqrt(np.sum(np.abs(f.coeffs) ** 2)))


def hs_norm(f: Field | VectorField, s: float) -> float:
    """Sobolev H^s norm with (1 + |k|^2)^s spectral weights."""
    if isinstance(f, VectorField):
        return float(np.sqrt(hs_norm(f.c1, s) ** 2 + hs_norm(f.c2, s) ** 2))
    w = (1.0 + f.grid.k_sq) ** s
    return float(np.sqrt(np.sum(w * np.abs(f.coeffs) ** 2)))


def linf_norm(f: Field | VectorField) -> float:
    if isinstance(f, VectorField):
        return float(np.max(np.sqrt(f.c1.values**2 + f.c2.values**2)))
    return float(np.max(np.abs(f.values)))


def grad_norm_sq(u: VectorField) -> float:
    """Sum_ij ||d_j u_i||^2 via the full |k|^2 multiplier (matches the implicit solve)."""
    g = u.grid
    return float(np.sum(g.k_sq * (np.abs(u.c1.coeffs) ** 2 + np.abs(u.c2.coeffs) ** 2)))


def random_band_field(grid: Grid, max_mode: int, amplitude: float, seed: int) -> Field:
    """Seeded zero-mean field band-limited to 0 < max(|i|,|j|) <= max_mode.

    White noise is filtered to the band and rescaled so the physical maximum
    equals the requested amplitude; deterministic for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((grid.n, grid.n))
    c = forward_transform(noise)
    band = np.maximum(np.abs(grid.index1), np.abs(grid.index2)) <= max_mode
    band[0, 0] = False
    c = np.where(band, c, 0.0)
    peak = np.max(np.abs(np.real(inverse_transform(c))))
    if peak == 0.0:
        return Field.zeros(grid)
    return Field.from_spectral(grid, c * (amplitude / peak))


def random_band_velocity(grid: Grid, max_mode: int, amplitude: float, seed: int) -> VectorField:
    """Seeded solenoidal zero-mean velocity, band-limited and amplitude-normalized."""
    rng = np.random.default_rng(seed)
    band = np.maximum(np.abs(grid.index1), np.abs(grid.index2)) <= max_mode
    band[0, 0] = False
    comps = []
    for _ in range(2):
        c = forward_transform(rng.standard_normal((grid.n, grid.n)))
        comps.append(Field.from_spectral(grid, np.where(band, c, 0.0)))
    u = leray_project(VectorField(*comps))
    peak = linf_norm(u)
    if peak == 0.0:
        return VectorField.zeros(grid)
    return (amplitude / peak) * u
