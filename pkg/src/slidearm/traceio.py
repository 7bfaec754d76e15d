"""Trace and report serialization.

The CSV layout is the package's canonical on-disk format: a fixed 16-column
header, one row per plant step, every value printed with 17 significant
digits so parsing the file back reproduces the floats bitwise.  All writers
go through an atomic temp-file-and-rename so an interrupted run never leaves
a half-written file under the final name.
"""

import os
import tempfile

import numpy as np

from .analysis import ComparisonTable, Metrics, tracking_metrics
from .sim import Trace

__all__ = [
    "CSV_HEADER",
    "atomic_write_bytes",
    "atomic_write_text",
    "comparison_csv",
    "comparison_text",
    "metrics_text",
    "read_trace_csv",
    "trace_metrics_text",
    "verdict_line",
    "write_trace_csv",
]

CSV_HEADER = ("t,q1,q2,qd1,qd2,e1,e2,edot1,edot2,"
              "sigma1,sigma2,tau1,tau2,d1,d2,L")


def atomic_write_bytes(path, data: bytes):
    """Write data to path via a temp file in the same directory + rename."""
    path = os.fspath(path)
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def atomic_write_text(path, text: str):
    atomic_write_bytes(path, text.encode("utf-8"))


def write_trace_csv(tr: Trace, path):
    """Write the 16-column CSV; LF endings, 17 significant digits."""
    cols = (tr.t,
            tr.q[:, 0], tr.q[:, 1],
            tr.q_ref[:, 0], tr.q_ref[:, 1],
            tr.e[:, 0], tr.e[:, 1],
            tr.edot[:, 0], tr.edot[:, 1],
            tr.sigma[:, 0], tr.sigma[:, 1],
            tr.tau[:, 0], tr.tau[:, 1],
            tr.d[:, 0], tr.d[:, 1],
            tr.L)
    lists = [c.tolist() for c in cols]
    out = [CSV_HEADER]
    out.extend(",".join(format(col[i], ".17g") for col in lists)
               for i in range(len(tr)))
    out.append("")
    atomic_write_text(path, "\n".join(out))


def read_trace_csv(path):
    """Read a trace CSV back as (column_names, {name: float array}).

    The file must carry the canonical header; raises ValueError otherwise.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        header = fh.readline().rstrip("\n")
        if header != CSV_HEADER:
            raise ValueError(
                f"unexpected CSV header {header!r}; expected {CSV_HEADER!r}")
        names = header.split(",")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    n = len(names)
    for i, row in enumerate(rows):
        if len(row) != n:
            raise ValueError(f"row {i + 2} has {len(row)} fields, expected {n}")
    data = np.array(rows, dtype=float) if rows else np.empty((0, n))
    return names, {name: data[:, j] for j, name in enumerate(names)}


def _fmt(v: float) -> str:
    return format(float(v), ".9g")


_METRIC_ROWS = (
    ("rmse", "rad"),
    ("max_abs_error", "rad"),
    ("iae", "rad*s"),
    ("control_effort", "N*m*s"),
    ("chatter_index", "N*m/s"),
)


def metrics_text(label: str, m: Metrics) -> str:
    """Human-readable per-joint metrics block for one run."""
    width = max(len(name) for name, _ in _METRIC_ROWS)
    lines = [f"controller: {label}"]
    for name, unit in _METRIC_ROWS:
        v = getattr(m, name)
        lines.append(f"  {name:<{width}}  joint1 = {_fmt(v[0]):>15}  "
                     f"joint2 = {_fmt(v[1]):>15}  [{unit}]")
    lines.append("")
    return "\n".join(lines)


def comparison_csv(table: ComparisonTable) -> str:
    """Comparison table as CSV: one row per controller, metric columns."""
    cols = ["controller"]
    for name, _ in _METRIC_ROWS:
        cols += [f"{name}1", f"{name}2"]
    out = [",".join(cols)]
    for label, m in zip(table.labels, table.metrics):
        row = [label]
        for name, _ in _METRIC_ROWS:
            v = getattr(m, name)
            row += [format(float(v[0]), ".17g"), format(float(v[1]), ".17g")]
        out.append(",".join(row))
    out.append("")
    return "\n".join(out)


def comparison_text(table: ComparisonTable) -> str:
    """Human-readable comparison: metrics blocks plus pairwise rmse ratios."""
    parts = [metrics_text(label, m)
             for label, m in zip(table.labels, table.metrics)]
    lines = ["pairwise rmse ratios (row / column):"]
    for (la, lb), ratio in sorted(table.rmse_ratio.items()):
        lines.append(f"  {la} / {lb}: joint1 = {_fmt(ratio[0])}, "
                     f"joint2 = {_fmt(ratio[1])}")
    lines.append("")
    return "\n".join(parts + lines)


def verdict_line(table: ComparisonTable) -> str:
    """One-sentence ranking by mean rmse across joints, worst first."""
    ranked = sorted(zip(table.labels, table.metrics),
                    key=lambda lm: -float(np.mean(lm[1].rmse)))
    order = " > ".join(label for label, _ in ranked)
    worst = ranked[0][0]
    return f"rmse ranking (worst first): {order}; {worst} tracks worst"


def trace_metrics_text(label: str, tr: Trace) -> str:
    return metrics_text(label, tracking_metrics(tr))
