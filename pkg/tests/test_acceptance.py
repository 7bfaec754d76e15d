"""Acceptance gate: one test per release criterion.

Run with ``pytest -v tests/test_acceptance.py`` to get a pass/fail line per
criterion; each test also prints a one-line numeric summary (visible with
``-s`` or on failure).  Expected values come from measured runs, not wishes;
see tests/test_sim.py and tests/test_dynamics.py for the finer-grained
versions of the same checks.
"""
import dataclasses
import math
import time

import numpy as np
import pytest
from click.testing import CliRunner

from slidearm.analysis import lyapunov_report, tracking_metrics
from slidearm.cli import main as cli_main
from slidearm.control import (HybridGains, IntegralState, NismcGains,
                              SmcGains, SwitchConfig, ReachingArg,
                              TrackingError, hnismc_control, nismc_control,
                              smc_control, switch, validate_gains)
from slidearm.dynamics import (CoriolisMode, JointState, RobotParams,
                               coriolis_matrix, energy, forward_dynamics,
                               gravity_vector, inverse_dynamics, mass_matrix)
from slidearm.sim import (ControllerKind, DisturbanceModel, FilterParams,
                          ReferenceKind, ReferenceSpec, Scenario,
                          filter_init, filter_step, reference, rk4_step,
                          run_simulation)
from slidearm.traceio import CSV_HEADER

P = RobotParams()


@pytest.fixture(scope="module")
def default_runs():
    """The three benchmark runs on the stock scenario, with wall time."""
    base = Scenario()
    t0 = time.perf_counter()
    traces = {k.value: run_simulation(dataclasses.replace(base, controller=k))
              for k in ControllerKind}
    wall = time.perf_counter() - t0
    return base, traces, wall


def test_criterion_1_dynamics_property_sweep():
    t0 = time.perf_counter()
    rng = np.random.default_rng(12345)
    eps = 1e-6
    worst_sym = worst_rt = worst_skew = worst_grad = 0.0
    min_eig = math.inf
    for _ in range(1000):
        q = rng.uniform(-math.pi, math.pi, 2)
        w = rng.uniform(-5.0, 5.0, 2)
        s = JointState(q, w)
        m = mass_matrix(P, q)
        worst_sym = max(worst_sym, abs(m[0, 1] - m[1, 0]))
        min_eig = min(min_eig, float(np.linalg.eigvalsh(m)[0]))
        tau = rng.uniform(-5.0, 5.0, 2)
        a = forward_dynamics(P, s, tau)
        worst_rt = max(worst_rt,
                       float(np.max(np.abs(inverse_dynamics(P, s, a) - tau))))
        mdot = (mass_matrix(P, q + eps * w) - mass_matrix(P, q - eps * w)) / (2 * eps)
        skew = mdot - 2.0 * coriolis_matrix(P, s)
        worst_skew = max(worst_skew, float(np.max(np.abs(skew + skew.T))))
        grav = gravity_vector(P, q)
        for i in range(2):
            dq = np.zeros(2)
            dq[i] = eps
            vp = energy(P, JointState(q + dq, w))[1]
            vm = energy(P, JointState(q - dq, w))[1]
            worst_grad = max(worst_grad, abs(grav[i] - (vp - vm) / (2 * eps)))
    elapsed = time.perf_counter() - t0
    print(f"criterion 1: sym={worst_sym:.2e} min_eig={min_eig:.2e} "
          f"roundtrip={worst_rt:.2e} skew={worst_skew:.2e} "
          f"grad={worst_grad:.2e} elapsed={elapsed:.2f}s")
    assert worst_sym < 1e-12
    assert min_eig > 0.0
    assert worst_rt < 1e-9
    assert worst_skew < 1e-9
    assert worst_grad < 1e-6
    assert elapsed < 1.0


def test_criterion_2_integrator_accuracy():
    t0 = time.perf_counter()
    # harmonic oscillator, one full period at dt = 1e-3
    state = np.array([1.0, 0.0])
    t, dt = 0.0, 1e-3
    f = lambda tt, yy: np.array([yy[1], -yy[0]])
    while t < 2 * math.pi - dt:
        state = rk4_step(f, state, t, dt)
        t += dt
    state = rk4_step(f, state, t, 2 * math.pi - t)
    harmonic_err = abs(state[0] - 1.0)
    # unforced swing for 5 s; total energy must be conserved
    st0 = JointState([0.3, -0.2], [0.0, 0.0])
    y = np.array([*st0.q, *st0.qdot])

    def ff(tt, yy):
        s = JointState(yy[:2], yy[2:])
        a = forward_dynamics(P, s, [0.0, 0.0], mode=CoriolisMode.CHRISTOFFEL)
        return np.array([yy[2], yy[3], a[0], a[1]])

    e0 = sum(energy(P, st0))
    drift = 0.0
    tt = 0.0
    for k in range(50000):
        y = rk4_step(ff, y, tt, 1e-4)
        tt += 1e-4
        if k % 100 == 99:
            drift = max(drift,
                        abs(sum(energy(P, JointState(y[:2], y[2:]))) - e0))
    drift = max(drift, abs(sum(energy(P, JointState(y[:2], y[2:]))) - e0))
    elapsed = time.perf_counter() - t0
    print(f"criterion 2: harmonic={harmonic_err:.2e} drift={drift:.2e} "
          f"elapsed={elapsed:.2f}s")
    assert harmonic_err < 1e-8
    assert drift < 1e-6
    assert elapsed < 5.0


def test_criterion_3_filter_response():
    fp = FilterParams()
    n_dc = math.ceil(8.0 / (fp.zeta * fp.omega0) / fp.sample_dt)
    st = filter_init(np.array([0.0]))
    for _ in range(n_dc):
        st, y = filter_step(st, np.array([1.0]), fp)
    dc_err = abs(y[0] - 1.0)
    # 300 rad/s sine: second-order magnitude at ten times omega0
    st = filter_init(np.array([0.0]))
    n_tot = int(2.0 / fp.sample_dt)
    out = np.empty(n_tot)
    for k in range(n_tot):
        st, y = filter_step(st, np.array([math.sin(300.0 * k * fp.sample_dt)]),
                            fp)
        out[k] = y[0]
    tail = out[-500:]
    gain_300 = (tail.max() - tail.min()) / 2.0
    expected = 0.00994
    rel = abs(gain_300 - expected) / expected
    print(f"criterion 3: dc_err={dc_err:.2e} (after {n_dc} steps) "
          f"gain_at_300={gain_300:.6g} rel_dev={rel:.3f}")
    assert dc_err < 1e-3
    assert rel < 0.05


def test_criterion_4_exact_cancellation_at_rest():
    hold = dataclasses.replace(
        Scenario(),
        reference=ReferenceSpec(kind=ReferenceKind.HOLD,
                                offset=np.array([0.3, -0.4])),
        disturbance=DisturbanceModel.none(),
        initial=JointState([0.3, -0.4], [0.0, 0.0]))
    worst = {}
    for kind in ControllerKind:
        tr = run_simulation(dataclasses.replace(hold, controller=kind))
        worst[kind.value] = float(np.max(np.abs(tr.e)))
    line = " ".join(f"{k}={v:.2e}" for k, v in worst.items())
    print(f"criterion 4: max|e| over 10 s at held posture: {line}")
    for kind, value in worst.items():
        assert value < 1e-6, kind


def test_criterion_5_tracking_ranking(default_runs):
    base, traces, wall = default_runs
    r_smc = tracking_metrics(traces["smc"]).rmse
    r_n = tracking_metrics(traces["nismc"]).rmse
    r_h = tracking_metrics(traces["hnismc"]).rmse
    print(f"criterion 5: rmse smc={r_smc!r} nismc={r_n!r} hnismc={r_h!r} "
          f"wall={wall:.2f}s")
    assert np.all(r_smc > r_n)
    assert np.all(r_h <= 1.01 * r_n)
    assert np.all(r_n <= 0.8 * r_smc)
    assert wall < 10.0


def test_criterion_6_surface_energy_decrease(default_runs):
    base, traces, _ = default_runs
    finals = {}
    for label, tr in traces.items():
        rep = lyapunov_report(tr)
        assert rep.L_final < rep.L_initial, label
        finals[label] = (rep.L_initial, rep.L_final)
    # with the reaching term driven by the surface itself, gated growth
    # of L across controller ticks must be rare
    sw = SwitchConfig(reaching_on=ReachingArg.SIGMA)
    fracs = {}
    for kind in ControllerKind:
        tr = run_simulation(dataclasses.replace(base, controller=kind,
                                                switch=sw))
        rep = lyapunov_report(tr, tol=1e-9, sigma_min=base.switch.boundary)
        fracs[kind.value] = (rep.fraction_increasing, rep.n_gated)
    line = " ".join(f"{k}:L{v[0]:.3g}->{v[1]:.3g}" for k, v in finals.items())
    frac_line = " ".join(f"{k}={v[0]:.4f}(n={v[1]})" for k, v in fracs.items())
    print(f"criterion 6: {line}; gated rise fraction {frac_line}")
    for kind, (frac, _) in fracs.items():
        assert frac < 0.05, kind


def test_criterion_7_controller_structure():
    rng = np.random.default_rng(2027)
    sw = SwitchConfig()
    zero_xi = HybridGains(xi1=0.0, xi2=0.0)
    dev_xi = 0.0
    dev_reach = 0.0
    for _ in range(100):
        q = rng.uniform(-math.pi, math.pi, 2)
        w = rng.uniform(-3.0, 3.0, 2)
        s = JointState(q, w)
        t = rng.uniform(0.0, 10.0)
        ref = reference(ReferenceSpec(), t)
        err = TrackingError(ref[0] - q, ref[1] - w)
        ist = IntegralState(z=rng.uniform(-1.0, 1.0, 2), t_last=t)
        tau_h = hnismc_control(P, s, ref, ist, err, zero_xi, sw)
        tau_n = nismc_control(P, s, ref, ist, err, zero_xi.base, sw)
        dev_xi = max(dev_xi, float(np.max(np.abs(tau_h - tau_n))))
        assert np.array_equal(tau_h, tau_n)
        g_hi = SmcGains(gamma=20.0)
        g_lo = SmcGains(gamma=10.0)
        d_tau = (smc_control(P, s, ref, g_hi, sw)
                 - smc_control(P, s, ref, g_lo, sw))
        pred = mass_matrix(P, q) @ ((g_hi.gamma - g_lo.gamma)
                                    * switch(ref[0] - q, sw))
        dev_reach = max(dev_reach, float(np.max(np.abs(d_tau - pred))))
    clean = validate_gains(HybridGains())
    flagged = validate_gains(
        HybridGains(base=NismcGains(gamma=0.04), xi1=0.05, xi2=0.05))
    print(f"criterion 7: xi0_dev={dev_xi:.2e} reach_dev={dev_reach:.2e} "
          f"default_warnings={len(clean)} dominated_warnings={len(flagged)}")
    assert dev_xi == 0.0
    assert dev_reach < 1e-9
    assert clean == []
    assert flagged and all("joint" in msg for msg in flagged)


def test_criterion_8_cli_determinism(tmp_path):
    runner = CliRunner()
    dirs = [tmp_path / "a", tmp_path / "b"]
    for out in dirs:
        res = runner.invoke(cli_main, ["simulate", "--out", str(out)])
        assert res.exit_code == 0, res.output
    names = ("scenario.ini", "trace.csv", "metrics.txt",
             "tracking.svg", "error.svg", "torque.svg")
    sizes = {}
    for name in names:
        a = (dirs[0] / name).read_bytes()
        b = (dirs[1] / name).read_bytes()
        assert a == b, name
        sizes[name] = len(a)
    lines = (dirs[0] / "trace.csv").read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 1 + 100001
    print(f"criterion 8: identical bytes for {len(names)} files, "
          f"{len(lines) - 1} csv rows, trace={sizes['trace.csv']} bytes")
