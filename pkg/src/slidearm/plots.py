"""Figure rendering for traces: tracking, error, and torque views.

Figures are written as SVG through the Agg backend with a pinned hash salt
and no date metadata, so rendering the same trace twice gives byte-identical
files.  Dense columns are decimated to a fixed stride before plotting; torque
is drawn as steps at controller-tick resolution because it is piecewise
constant by construction.
"""

import io

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .sim import Trace
from .traceio import atomic_write_bytes

__all__ = [
    "save_error_plot",
    "save_torque_plot",
    "save_tracking_plot",
]

matplotlib.rcParams["svg.hashsalt"] = "slidearm"
matplotlib.rcParams["svg.fonttype"] = "path"

_MAX_POINTS = 4000

# fixed palette so overlays stay readable and stable across runs
_COLORS = ("#1f6fb4", "#d1495b", "#3a7d44", "#8d5a97")


def _stride(n: int) -> int:
    return max(1, (n + _MAX_POINTS - 1) // _MAX_POINTS)


def _decimate(tr: Trace, col: np.ndarray):
    """Every k-th row plus the final row, keeping curve endpoints exact."""
    k = _stride(len(tr))
    idx = np.arange(0, len(tr), k)
    if idx[-1] != len(tr) - 1:
        idx = np.append(idx, len(tr) - 1)
    return tr.t[idx], col[idx]


def _step_points(tr: Trace, col: np.ndarray):
    """Torque breakpoints: tick rows if present, else every row."""
    rows = tr.tick_rows
    if rows is None or len(rows) == 0:
        return tr.t, col
    idx = np.asarray(rows)
    if idx[-1] != len(tr) - 1:
        idx = np.append(idx, len(tr) - 1)
    return tr.t[idx], col[idx]


def _save(fig, path):
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    atomic_write_bytes(path, buf.getvalue())


def _two_axes(title: str):
    fig, axes = plt.subplots(2, 1, figsize=(8.0, 6.0), sharex=True)
    fig.suptitle(title)
    axes[1].set_xlabel("time [s]")
    for ax in axes:
        ax.grid(True, alpha=0.3)
    return fig, axes


def save_tracking_plot(traces, path, title: str = "joint tracking"):
    """Reference vs measured positions, one subplot per joint.

    traces: sequence of (label, Trace) pairs; the reference is drawn once
    from the first trace.
    """
    pairs = list(traces)
    fig, axes = _two_axes(title)
    ref = pairs[0][1]
    for j, ax in enumerate(axes):
        t, qr = _decimate(ref, ref.q_ref[:, j])
        ax.plot(t, qr, color="#555555", linestyle="--", linewidth=1.2,
                label="reference")
        for c, (label, tr) in enumerate(pairs):
            t, q = _decimate(tr, tr.q[:, j])
            ax.plot(t, q, color=_COLORS[c % len(_COLORS)], linewidth=1.0,
                    label=label)
        ax.set_ylabel(f"q{j + 1} [rad]")
    axes[0].legend(loc="upper right", fontsize=8)
    _save(fig, path)


def save_error_plot(traces, path, title: str = "tracking error"):
    """Position error per joint for one or more labeled traces."""
    pairs = list(traces)
    fig, axes = _two_axes(title)
    for j, ax in enumerate(axes):
        for c, (label, tr) in enumerate(pairs):
            t, e = _decimate(tr, tr.e[:, j])
            ax.plot(t, e, color=_COLORS[c % len(_COLORS)], linewidth=1.0,
                    label=label)
        ax.set_ylabel(f"e{j + 1} [rad]")
    axes[0].legend(loc="upper right", fontsize=8)
    _save(fig, path)


def save_torque_plot(traces, path, title: str = "control input"):
    """Commanded joint torques, stepped at controller ticks."""
    pairs = list(traces)
    fig, axes = _two_axes(title)
    for j, ax in enumerate(axes):
        for c, (label, tr) in enumerate(pairs):
            t, u = _step_points(tr, tr.tau[:, j])
            ax.plot(t, u, color=_COLORS[c % len(_COLORS)], linewidth=0.8,
                    drawstyle="steps-post", label=label)
        ax.set_ylabel(f"tau{j + 1} [N m]")
    axes[0].legend(loc="upper right", fontsize=8)
    _save(fig, path)
