"""End-to-end command checks plus trace file round-trips."""
import os

import numpy as np
import pytest
from click.testing import CliRunner

from slidearm.cli import main
from slidearm.config import parse_config
from slidearm.sim import run_simulation
from slidearm.traceio import (CSV_HEADER, atomic_write_text, read_trace_csv,
                              write_trace_csv)

SIM_FILES = ("scenario.ini", "trace.csv", "metrics.txt",
             "tracking.svg", "error.svg", "torque.svg")


def run_cli(*args):
    return CliRunner().invoke(main, list(args))


def all_output(result):
    out = result.output
    try:
        out += result.stderr
    except (ValueError, AttributeError):
        pass
    return out


def read_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_simulate_writes_expected_files(tmp_path):
    out = tmp_path / "run"
    result = run_cli("simulate", "--out", str(out), "--t-end", "0.2")
    assert result.exit_code == 0, result.output
    for name in SIM_FILES:
        assert (out / name).is_file(), name
    lines = (out / "trace.csv").read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 1 + 2001
    assert "hnismc" in (out / "metrics.txt").read_text()


def test_simulate_byte_identical_reruns(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    for out in (a, b):
        result = run_cli("simulate", "--out", str(out), "--t-end", "0.2")
        assert result.exit_code == 0, result.output
    for name in SIM_FILES:
        assert read_bytes(a / name) == read_bytes(b / name), name


def test_simulate_controller_override(tmp_path):
    out = tmp_path / "smc"
    result = run_cli("simulate", "--out", str(out), "--t-end", "0.1",
                     "--controller", "smc")
    assert result.exit_code == 0, result.output
    assert (out / "metrics.txt").read_text().startswith("controller: smc")
    assert "controller = smc" in (out / "scenario.ini").read_text()


def test_simulate_trace_matches_library_run(tmp_path):
    out = tmp_path / "run"
    result = run_cli("simulate", "--out", str(out), "--t-end", "0.1")
    assert result.exit_code == 0, result.output
    sc = parse_config(out / "scenario.ini")
    tr = run_simulation(sc)
    names, cols = read_trace_csv(out / "trace.csv")
    assert names == CSV_HEADER.split(",")
    assert np.array_equal(cols["t"], tr.t)
    assert np.array_equal(cols["q1"], tr.q[:, 0])
    assert np.array_equal(cols["tau2"], tr.tau[:, 1])
    assert np.array_equal(cols["L"], tr.L)


def test_compare_writes_expected_files(tmp_path):
    out = tmp_path / "cmp"
    result = run_cli("compare", "--out", str(out), "--t-end", "0.2")
    assert result.exit_code == 0, result.output
    for name in ("scenario.ini", "trace_smc.csv", "trace_nismc.csv",
                 "trace_hnismc.csv", "comparison.csv", "comparison.txt",
                 "tracking.svg", "error.svg", "torque.svg"):
        assert (out / name).is_file(), name
    assert "rmse ranking (worst first): smc >" in result.output
    assert "tracks worst" in result.output


def test_seed_option_controls_noise(tmp_path):
    cfg = tmp_path / "noise.ini"
    cfg.write_text("[disturbance]\nkind = band_limited_noise\namplitude = 0.5\n")
    outs = []
    for name, seed in (("s5", "5"), ("s5b", "5"), ("s6", "6")):
        out = tmp_path / name
        result = run_cli("simulate", "--config", str(cfg), "--out", str(out),
                         "--t-end", "0.1", "--seed", seed)
        assert result.exit_code == 0, result.output
        outs.append(read_bytes(out / "trace.csv"))
    assert outs[0] == outs[1]
    assert outs[0] != outs[2]


def test_divergent_run_exits_with_partial_trace(tmp_path):
    cfg = tmp_path / "unstable.ini"
    cfg.write_text("[controller.nismc]\nbeta = 2000\n[sim]\ncontroller = nismc\n")
    out = tmp_path / "boom"
    result = run_cli("simulate", "--config", str(cfg), "--out", str(out),
                     "--t-end", "1")
    assert result.exit_code == 1
    assert "diverged at t =" in all_output(result)
    lines = (out / "trace.csv").read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) > 100


def test_bad_controller_choice_is_usage_error(tmp_path):
    result = run_cli("simulate", "--out", str(tmp_path / "x"),
                     "--controller", "bogus")
    assert result.exit_code == 2
    assert "bogus" in all_output(result)


def test_unknown_config_key_reports_candidates(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[sim]\nfoo = 1\n")
    result = run_cli("simulate", "--config", str(cfg),
                     "--out", str(tmp_path / "x"))
    assert result.exit_code == 1
    msg = all_output(result)
    assert "foo" in msg and "t_end" in msg


def test_missing_config_file_is_usage_error(tmp_path):
    result = run_cli("simulate", "--config", str(tmp_path / "nope.ini"),
                     "--out", str(tmp_path / "x"))
    assert result.exit_code == 2


def test_out_is_required(tmp_path):
    result = run_cli("simulate")
    assert result.exit_code == 2


# --- trace file round-trips ------------------------------------------------

def test_trace_csv_round_trip_bitwise(tmp_path):
    import dataclasses
    from slidearm.sim import Scenario
    tr = run_simulation(dataclasses.replace(Scenario(), t_end=0.05))
    path = tmp_path / "t.csv"
    write_trace_csv(tr, path)
    names, cols = read_trace_csv(path)
    assert np.array_equal(cols["e1"], tr.e[:, 0])
    assert np.array_equal(cols["edot2"], tr.edot[:, 1])
    assert np.array_equal(cols["sigma1"], tr.sigma[:, 0])
    assert np.array_equal(cols["d1"], tr.d[:, 0])
    assert np.array_equal(cols["qd1"], tr.q_ref[:, 0])


def test_read_trace_csv_rejects_foreign_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("time,angle\n0,1\n")
    with pytest.raises(ValueError):
        read_trace_csv(path)


def test_atomic_write_replaces_and_leaves_no_temp(tmp_path):
    path = tmp_path / "f.txt"
    atomic_write_text(path, "one")
    atomic_write_text(path, "two")
    assert path.read_text() == "two"
    leftovers = [p for p in os.listdir(tmp_path) if p.startswith(".tmp-")]
    assert leftovers == []
