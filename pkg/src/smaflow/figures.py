"""Figure rendering for the report path (PNG files next to the delimited output)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .diagnostics import DiagnosticsRecord

__all__ = ["render_run_figures", "render_residual_figure"]


def _column(records, name):
    return np.array([getattr(r, name) for r in records])


def _semilogy(ax, t, y, label):
    pos = y > 0
    if np.any(pos):
        ax.semilogy(t[pos], y[pos], label=label)


def render_run_figures(records: list[DiagnosticsRecord], outdir: str | Path, final_state=None) -> list[Path]:
    """Energy, dissipation-split, and norm-decay plots; optionally the final fields."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    t = _column(records, "t")
    written = []

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(t, _column(records, "E"))
    ax.set_xlabel("t")
    ax.set_ylabel("total energy")
    ax.set_title("Energy decay")
    fig.tight_layout()
    path = outdir / "energy.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(6, 4))
    for name in ("D_mu1", "D_mu4", "D_mu5", "D_Q"):
        _semilogy(ax, t, _column(records, name), name)
    ax.set_xlabel("t")
    ax.set_ylabel("dissipation")
    ax.set_title("Dissipation split")
    if ax.lines:
        ax.legend()
    fig.tight_layout()
    path = outdir / "dissipation.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(6, 4))
    _semilogy(ax, t, _column(records, "grad_v_l2"), "||grad v||")
    _semilogy(ax, t, _column(records, "q_l2"), "||Q||")
    _semilogy(ax, t, _column(records, "A"), "A(t)")
    ax.set_xlabel("t")
    ax.set_ylabel("norm")
    ax.set_title("Decay of velocity gradient and chemical force")
    if ax.lines:
        ax.legend()
    fig.tight_layout()
    path = outdir / "norms.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    if final_state is not None:
        written.append(_render_fields(final_state, outdir))
    return written


def _render_fields(state, outdir: Path) -> Path:
    speed = np.sqrt(state.v.c1.values**2 + state.v.c2.values**2)
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    for ax, data, title in ((axes[0], state.phi.values.T, "layer variable"),
                            (axes[1], speed.T, "|v|")):
        im = ax.imshow(data, origin="lower", extent=(0, 1, 0, 1), cmap="RdBu_r")
        ax.set_title(f"{title} at t = {state.t:g}")
        fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    path = outdir / "fields.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_residual_figure(residuals: list[float], outdir: str | Path) -> Path:
    """Residual history of a steady solve."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 4))
    r = np.asarray(residuals)
    _semilogy(ax, np.arange(len(r), dtype=float), r, "||Q||")
    ax.set_xlabel("accepted iteration")
    ax.set_ylabel("residual")
    ax.set_title("Steady-state residual history")
    fig.tight_layout()
    path = outdir / "residual.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
