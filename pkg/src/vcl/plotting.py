"""Matplotlib figure output for CLI reports (headless Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .config import Motion, VortexConfig
from .kernels import DoublyPeriodic, SinglyPeriodic


def _draw_cell(ax, config: VortexConfig):
    if isinstance(config.geometry, SinglyPeriodic):
        ax.axvline(0.0, color="0.8", lw=0.8)
        ax.axvline(1.0, color="0.8", lw=0.8)
    elif isinstance(config.geometry, DoublyPeriodic):
        tau = config.geometry.tau
        cell = np.array([0, 1, 1 + tau, tau, 0])
        ax.plot(cell.real, cell.imag, color="0.8", lw=0.8)


def save_config_plot(path: str, config: VortexConfig, motion: Motion | None = None, title: str = "") -> None:
    """Scatter of the vortex set: filled markers for +1, open for -1."""
    fig, ax = plt.subplots(figsize=(5, 5))
    _draw_cell(ax, config)
    p, s = config.positions, config.circulations
    pos, neg = p[s > 0], p[s < 0]
    ax.scatter(pos.real, pos.imag, s=60, marker="o", color="tab:red", label="+1")
    ax.scatter(neg.real, neg.imag, s=60, marker="o", facecolors="none", edgecolors="tab:blue", label="-1")
    if motion is not None and abs(motion.v) > 0:
        c = p.mean()
        ax.annotate(
            "",
            xy=(c.real + motion.v.real, c.imag + motion.v.imag),
            xytext=(c.real, c.imag),
            arrowprops=dict(arrowstyle="->", color="0.3"),
        )
    ax.set_aspect("equal")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_xlabel("Re p")
    ax.set_ylabel("Im p")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_field_plot(path: str, config: VortexConfig, points: np.ndarray, velocities: np.ndarray, title: str = "") -> None:
    """Quiver of the sampled flow with the vortex positions overlaid."""
    fig, ax = plt.subplots(figsize=(6, 5))
    _draw_cell(ax, config)
    speed = np.abs(velocities)
    ax.quiver(
        points.real,
        points.imag,
        velocities.real,
        velocities.imag,
        speed,
        cmap="viridis",
        scale_units="xy",
        angles="xy",
    )
    p, s = config.positions, config.circulations
    ax.scatter(p[s > 0].real, p[s > 0].imag, s=50, color="tab:red", zorder=3)
    ax.scatter(p[s < 0].real, p[s < 0].imag, s=50, facecolors="none", edgecolors="tab:blue", zorder=3)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sweep_plot(path: str, params: np.ndarray, v_values: np.ndarray, ranks: np.ndarray, param_name: str) -> None:
    """Velocity components and Jacobian rank along a parameter sweep."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
    ax1.plot(params, v_values.real, "o-", label="Re v", ms=3)
    ax1.plot(params, v_values.imag, "s-", label="Im v", ms=3)
    ax1.set_ylabel("velocity")
    ax1.legend(fontsize=8)
    ax2.step(params, ranks, where="mid", color="tab:green")
    ax2.set_ylabel("rank")
    ax2.set_xlabel(param_name)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_trajectory_plot(path: str, times: np.ndarray, states: np.ndarray, circulations: np.ndarray) -> None:
    """Paths traced by each vortex over the integration window."""
    fig, ax = plt.subplots(figsize=(5, 5))
    for k in range(states.shape[1]):
        color = "tab:red" if circulations[k] > 0 else "tab:blue"
        ax.plot(states[:, k].real, states[:, k].imag, color=color, lw=0.8)
        ax.plot(states[0, k].real, states[0, k].imag, "o", color=color, ms=4)
    ax.set_aspect("equal")
    ax.set_xlabel("Re p")
    ax.set_ylabel("Im p")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
