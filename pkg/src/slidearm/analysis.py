"""Post-processing of simulation traces.

Tracking quality (rmse, peak error, integrated absolute error), actuator cost
(effort, torque total variation), surface-energy series L = 0.5 sigma' sigma
with an empirical decrease check, and side-by-side controller comparison.
All functions are pure and operate on immutable Trace values.
"""

from dataclasses import dataclass

import numpy as np

from .sim import Trace

__all__ = [
    "ComparisonTable",
    "EmptyTrace",
    "GridMismatch",
    "LyapunovReport",
    "Metrics",
    "compare",
    "lyapunov_report",
    "tracking_metrics",
]


class EmptyTrace(ValueError):
    """Raised when a metric is requested from a trace with no rows."""


class GridMismatch(ValueError):
    """Raised when compared traces do not share a time grid and reference."""


@dataclass(frozen=True, eq=False)
class Metrics:
    """Per-joint tracking and actuation figures; all entries shape (2,).

    rmse and max_abs_error in rad, iae in rad*s, control_effort in N*m*s,
    chatter_index (total torque variation per second) in N*m/s.
    """

    rmse: np.ndarray
    max_abs_error: np.ndarray
    iae: np.ndarray
    control_effort: np.ndarray
    chatter_index: np.ndarray


@dataclass(frozen=True, eq=False)
class LyapunovReport:
    """Surface-energy summary of one run.

    L is the per-row series 0.5 sigma' sigma.  fraction_increasing is the
    share of controller-tick intervals whose start satisfies the sigma_min
    gate and whose L rises by more than the tolerance; intervals are taken
    between ticks rather than plant rows so torque-hold ripple is not counted.
    """

    L: np.ndarray
    fraction_increasing: float
    L_initial: float
    L_final: float
    n_intervals: int
    n_gated: int


def _require_rows(tr: Trace):
    if len(tr) == 0:
        raise EmptyTrace("trace has no rows")


def tracking_metrics(tr: Trace) -> Metrics:
    """Metrics of one trace.  One-row traces get zero iae/effort/chatter."""
    _require_rows(tr)
    e = tr.e
    tau = tr.tau
    t = tr.t
    rmse = np.sqrt(np.mean(e * e, axis=0))
    max_abs = np.max(np.abs(e), axis=0)
    if len(tr) > 1:
        iae = np.trapezoid(np.abs(e), t, axis=0)
        effort = np.trapezoid(np.abs(tau), t, axis=0)
        duration = t[-1] - t[0]
        chatter = np.sum(np.abs(np.diff(tau, axis=0)), axis=0) / duration
    else:
        iae = np.zeros(2)
        effort = np.zeros(2)
        chatter = np.zeros(2)
    return Metrics(rmse=rmse, max_abs_error=max_abs, iae=iae,
                   control_effort=effort, chatter_index=chatter)


def lyapunov_report(tr: Trace, tol: float = 1e-9,
                    sigma_min: float = 0.0) -> LyapunovReport:
    """Empirical decrease check of the surface energy.

    tol is the absolute rise in L below which an interval counts as
    non-increasing.  sigma_min gates the intervals: only those whose starting
    max-norm of sigma exceeds it enter the fraction (0.0 keeps every interval
    with a nonzero surface).  Traces without tick annotations fall back to
    row-by-row intervals.
    """
    _require_rows(tr)
    L = tr.L
    rows = tr.tick_rows
    if rows is None or len(rows) == 0:
        rows = np.arange(len(tr))
    Lt = L[rows]
    sig = tr.sigma[rows]
    n_intervals = max(len(rows) - 1, 0)
    if n_intervals == 0:
        return LyapunovReport(L=L, fraction_increasing=0.0,
                              L_initial=float(L[0]), L_final=float(L[-1]),
                              n_intervals=0, n_gated=0)
    start_norm = np.max(np.abs(sig[:-1]), axis=1)
    gate = start_norm > sigma_min
    n_gated = int(gate.sum())
    if n_gated == 0:
        frac = 0.0
    else:
        rising = (np.diff(Lt) > tol) & gate
        frac = float(rising.sum() / n_gated)
    return LyapunovReport(L=L, fraction_increasing=frac,
                          L_initial=float(L[0]), L_final=float(L[-1]),
                          n_intervals=n_intervals, n_gated=n_gated)


@dataclass(frozen=True, eq=False)
class ComparisonTable:
    """Metrics per labeled trace plus pairwise per-joint rmse ratios.

    labels keeps the input order; metrics aligns with it; rmse_ratio maps
    (label_a, label_b) to rmse_a / rmse_b, shape (2,), for every ordered pair.
    """

    labels: tuple
    metrics: tuple
    rmse_ratio: dict


def compare(traces) -> ComparisonTable:
    """Side-by-side comparison of two or more labeled traces.

    traces is a sequence of (label, Trace) pairs sharing one time grid and
    one reference; GridMismatch flags scenario drift between runs.
    """
    pairs = list(traces)
    if len(pairs) < 2:
        raise ValueError(f"compare needs at least 2 traces, got {len(pairs)}")
    labels = tuple(p[0] for p in pairs)
    if len(set(labels)) != len(labels):
        raise ValueError(f"duplicate labels in {labels}")
    base = pairs[0][1]
    for label, tr in pairs[1:]:
        if not np.array_equal(tr.t, base.t):
            raise GridMismatch(f"trace {label!r} has a different time grid")
        if not (np.array_equal(tr.q_ref, base.q_ref)
                and np.array_equal(tr.qdot_ref, base.qdot_ref)):
            raise GridMismatch(f"trace {label!r} follows a different reference")
    mets = tuple(tracking_metrics(tr) for _, tr in pairs)
    ratio = {}
    for la, ma in zip(labels, mets):
        for lb, mb in zip(labels, mets):
            if la == lb:
                continue
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio[(la, lb)] = ma.rmse / mb.rmse
    return ComparisonTable(labels=labels, metrics=mets, rmse_ratio=ratio)
