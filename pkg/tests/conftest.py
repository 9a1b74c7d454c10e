"""Shared fixtures and oracle helpers for the test suite."""

import numpy as np
import pytest

from smaflow import Field, VectorField, make_grid


@pytest.fixture(scope="session")
def grid16():
    return make_grid(16)


@pytest.fixture(scope="session")
def grid32():
    return make_grid(32)


def sin_mode(grid, amplitude, m1=1, m2=0):
    """Field A sin(2 pi (m1 x1 + m2 x2)) built from exact spectral coefficients."""
    c = np.zeros((grid.n, grid.n), complex)
    c[m1 % grid.n, m2 % grid.n] = amplitude / 2j
    c[(-m1) % grid.n, (-m2) % grid.n] = -amplitude / 2j
    return Field.from_spectral(grid, c)


def cos_mode(grid, amplitude, m1=1, m2=0):
    c = np.zeros((grid.n, grid.n), complex)
    c[m1 % grid.n, m2 % grid.n] = amplitude / 2
    c[(-m1) % grid.n, (-m2) % grid.n] = amplitude / 2
    return Field.from_spectral(grid, c)


def taylor_green(grid, amplitude=1.0):
    """v = A (sin(2 pi x1) cos(2 pi x2), -cos(2 pi x1) sin(2 pi x2)); solenoidal."""
    s1, c1 = np.sin(2 * np.pi * grid.x1), np.cos(2 * np.pi * grid.x1)
    s2, c2 = np.sin(2 * np.pi * grid.x2), np.cos(2 * np.pi * grid.x2)
    return VectorField(
        Field.from_physical(grid, amplitude * s1 * c2),
        Field.from_physical(grid, -amplitude * c1 * s2),
    )


def refine_values(field, factor):
    """Trigonometric interpolation of a band-limited field onto a finer grid.

    Only valid for fields without Nyquist content (all test fields here are
    band-limited well below it).
    """
    n = field.grid.n
    m = n * factor
    c = np.fft.fftshift(field.coeffs)
    big = np.zeros((m, m), complex)
    s = (m - n) // 2
    big[s:s + n, s:s + n] = c
    return np.real(np.fft.ifft2(np.fft.ifftshift(big), norm="forward"))


def fd_gradient(vals):
    """Second-order central-difference gradient on the unit torus."""
    m = vals.shape[0]
    h = 1.0 / m
    g1 = (np.roll(vals, -1, axis=0) - np.roll(vals, 1, axis=0)) / (2 * h)
    g2 = (np.roll(vals, -1, axis=1) - np.roll(vals, 1, axis=1)) / (2 * h)
    return g1, g2


def fd_laplacian(vals):
    m = vals.shape[0]
    h = 1.0 / m
    return (np.roll(vals, -1, 0) + np.roll(vals, 1, 0) + np.roll(vals, -1, 1)
            + np.roll(vals, 1, 1) - 4 * vals) / h**2


def fd_divergence(a1, a2):
    m = a1.shape[0]
    h = 1.0 / m
    return ((np.roll(a1, -1, 0) - np.roll(a1, 1, 0)) / (2 * h)
            + (np.roll(a2, -1, 1) - np.roll(a2, 1, 1)) / (2 * h))


def _symbolic_mode_expr(amplitude, K, eps):
    import sympy as sp

    x = sp.symbols("x")
    A, Ks, es = sp.Float(amplitude, 17), sp.Float(K, 17), sp.Float(eps, 17)
    phi = A * sp.sin(2 * sp.pi * x)
    d = sp.diff(phi, x)
    f = (d**2 - 1) / es**2 * d
    return x, sp.diff(f, x), -Ks * sp.diff(phi, x, 4) + sp.diff(f, x)


def symbolic_q_values(grid, amplitude, K, eps):
    """Closed-form Q for phi = A sin(2 pi x1), by symbolic differentiation."""
    import sympy as sp

    x, _, q = _symbolic_mode_expr(amplitude, K, eps)
    fn = sp.lambdify(x, q, "numpy")
    return fn(np.asarray(grid.x1 * np.ones((1, grid.n)), dtype=float))


def symbolic_div_f_values(grid, amplitude, eps):
    """Closed-form div f(grad phi) for phi = A sin(2 pi x1)."""
    import sympy as sp

    x, div_f, _ = _symbolic_mode_expr(amplitude, 1.0, eps)
    fn = sp.lambdify(x, div_f, "numpy")
    return fn(np.asarray(grid.x1 * np.ones((1, grid.n)), dtype=float))
