"""Command-line interface.

Two commands: ``simulate`` runs one scenario and writes its trace, metrics,
resolved-scenario sidecar, and figures; ``compare`` runs all three torque
laws on the identical scenario and adds a combined table plus overlay
figures.  Set SLIDEARM_LOG=debug|info|warning|error to control verbosity
(defaulted-key provenance is logged at info).
"""

import dataclasses
import logging
import os
import sys

import click

from .analysis import compare as compare_traces
from .analysis import tracking_metrics
from .config import ConfigError, default_scenario, parse_config, scenario_to_ini
from .plots import save_error_plot, save_torque_plot, save_tracking_plot
from .sim import ControllerKind, NonFiniteState, run_simulation
from .traceio import (atomic_write_text, comparison_csv, comparison_text,
                      metrics_text, verdict_line, write_trace_csv)

log = logging.getLogger(__name__)

_CONTROLLER_NAMES = [k.value for k in ControllerKind]


def _setup_logging():
    level = os.environ.get("SLIDEARM_LOG", "warning").strip().lower()
    chosen = {"debug": logging.DEBUG, "info": logging.INFO,
              "warning": logging.WARNING, "error": logging.ERROR}.get(level)
    if chosen is None:
        chosen = logging.WARNING
    logging.basicConfig(level=chosen,
                        format="%(levelname)s %(name)s: %(message)s")
    if level not in ("debug", "info", "warning", "error"):
        log.warning("SLIDEARM_LOG=%r not recognized; using warning", level)


def _load_scenario(config, seed, dt_plant, t_end):
    try:
        sc = parse_config(config) if config else default_scenario()
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from exc
    except OSError as exc:
        raise click.ClickException(f"cannot read config: {exc}") from exc
    try:
        if seed is not None:
            sc = dataclasses.replace(
                sc, disturbance=dataclasses.replace(sc.disturbance, seed=seed))
        if dt_plant is not None:
            sc = dataclasses.replace(sc, dt_plant=dt_plant)
        if t_end is not None:
            sc = dataclasses.replace(sc, t_end=t_end)
    except ValueError as exc:
        raise click.ClickException(f"invalid override: {exc}") from exc
    return sc


def _prepare_out(out) -> str:
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as exc:
        raise click.ClickException(f"cannot create output dir: {exc}") from exc
    return out


@click.group()
def main():
    """Simulate sliding-mode controllers on a two-link arm."""
    _setup_logging()


_shared = [
    click.option("--config", type=click.Path(exists=True, dir_okay=False),
                 default=None, help="INI scenario file (defaults when omitted)."),
    click.option("--out", required=True,
                 type=click.Path(file_okay=False), help="Output directory."),
    click.option("--seed", type=click.IntRange(min=0), default=None,
                 help="Override the disturbance noise seed."),
    click.option("--dt-plant", type=float, default=None,
                 help="Override the plant integration step (s)."),
    click.option("--t-end", type=float, default=None,
                 help="Override the simulation horizon (s)."),
]


def _with_shared(cmd):
    for opt in reversed(_shared):
        cmd = opt(cmd)
    return cmd


@main.command()
@_with_shared
@click.option("--controller", type=click.Choice(_CONTROLLER_NAMES),
              default=None,
              help="Torque law to run (default: the scenario's).")
def simulate(config, out, seed, dt_plant, t_end, controller):
    """Run one scenario; write trace.csv, metrics.txt, scenario.ini, figures."""
    sc = _load_scenario(config, seed, dt_plant, t_end)
    if controller is not None:
        sc = dataclasses.replace(sc, controller=ControllerKind(controller))
    out = _prepare_out(out)
    atomic_write_text(os.path.join(out, "scenario.ini"), scenario_to_ini(sc))
    try:
        tr = run_simulation(sc)
    except NonFiniteState as exc:
        if exc.trace is not None and len(exc.trace):
            write_trace_csv(exc.trace, os.path.join(out, "trace.csv"))
        click.echo(f"simulation diverged at t = {exc.t:.9g} s "
                   f"(partial trace retained)", err=True)
        sys.exit(1)
    write_trace_csv(tr, os.path.join(out, "trace.csv"))
    label = sc.controller.value
    atomic_write_text(os.path.join(out, "metrics.txt"),
                      metrics_text(label, tracking_metrics(tr)))
    pairs = [(label, tr)]
    save_tracking_plot(pairs, os.path.join(out, "tracking.svg"))
    save_error_plot(pairs, os.path.join(out, "error.svg"))
    save_torque_plot(pairs, os.path.join(out, "torque.svg"))
    click.echo(f"wrote {out}/trace.csv ({len(tr)} rows), metrics.txt, "
               "scenario.ini, tracking.svg, error.svg, torque.svg")


@main.command()
@_with_shared
def compare(config, out, seed, dt_plant, t_end):
    """Run all three controllers on one scenario and compare them."""
    sc = _load_scenario(config, seed, dt_plant, t_end)
    out = _prepare_out(out)
    atomic_write_text(os.path.join(out, "scenario.ini"), scenario_to_ini(sc))
    pairs = []
    for kind in ControllerKind:
        sck = dataclasses.replace(sc, controller=kind)
        try:
            tr = run_simulation(sck)
        except NonFiniteState as exc:
            if exc.trace is not None and len(exc.trace):
                write_trace_csv(exc.trace,
                                os.path.join(out, f"trace_{kind.value}.csv"))
            click.echo(f"{kind.value} diverged at t = {exc.t:.9g} s "
                       f"(partial trace retained)", err=True)
            sys.exit(1)
        write_trace_csv(tr, os.path.join(out, f"trace_{kind.value}.csv"))
        pairs.append((kind.value, tr))
    table = compare_traces(pairs)
    atomic_write_text(os.path.join(out, "comparison.csv"),
                      comparison_csv(table))
    atomic_write_text(os.path.join(out, "comparison.txt"),
                      comparison_text(table))
    save_tracking_plot(pairs, os.path.join(out, "tracking.svg"),
                       title="joint tracking, three controllers")
    save_error_plot(pairs, os.path.join(out, "error.svg"),
                    title="tracking error, three controllers")
    save_torque_plot(pairs, os.path.join(out, "torque.svg"),
                     title="control input, three controllers")
    click.echo(verdict_line(table))
    click.echo(f"wrote {out}: three traces, comparison.csv, comparison.txt, "
               "scenario.ini, tracking.svg, error.svg, torque.svg")


if __name__ == "__main__":
    main()
