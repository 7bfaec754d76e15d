"""INI parsing: units, defaults, diagnostics, and round-tripping."""
import math

import numpy as np
import pytest

from slidearm.config import (ConfigError, ParseError, UnitError, UnknownKey,
                             default_scenario, parse_config, parse_config_text,
                             scenario_to_ini)
from slidearm.control import SwitchKind
from slidearm.sim import (ControllerKind, DisturbanceKind, ReferenceKind,
                          scenario_fingerprint)


def test_empty_text_gives_default_scenario():
    assert scenario_fingerprint(parse_config_text("")) \
        == scenario_fingerprint(default_scenario())


def test_benchmark_defaults():
    sc = default_scenario()
    p = sc.params_controller
    assert (p.m1, p.m2, p.l1, p.l2, p.gravity) == (0.386, 0.722, 0.32, 0.36, 9.81)
    assert np.array_equal(sc.smc_gains.lam, [50.0, 50.0])
    assert np.array_equal(sc.nismc_gains.alpha, [50.0, 50.0])
    assert np.array_equal(sc.nismc_gains.beta, [800.0, 800.0])
    assert np.array_equal(sc.hybrid_gains.xi1, [0.05, 0.05])
    assert sc.controller is ControllerKind.HNISMC
    assert sc.dt_control == pytest.approx(1.25e-3)
    assert sc.t_end == 10.0
    assert sc.filter is None
    assert sc.disturbance.kind is DisturbanceKind.VISCOUS_COULOMB


def test_unit_conversions():
    sc = parse_config_text("""
[robot]
m1 = 386 g
l1 = 320 mm
[reference]
amplitude = 45 deg
[sim]
t_end = 500 ms
initial_q = 10 deg, 0
""")
    p = sc.params_controller
    assert p.m1 == pytest.approx(0.386, rel=1e-12)
    assert p.l1 == pytest.approx(0.32, rel=1e-12)
    assert sc.reference.amplitude[0] == pytest.approx(math.pi / 4, rel=1e-12)
    assert sc.t_end == pytest.approx(0.5, rel=1e-12)
    assert sc.initial.q[0] == pytest.approx(math.radians(10.0), rel=1e-12)


def test_scalar_applies_to_both_joints():
    sc = parse_config_text("[controller.smc]\nlambda = 30\n")
    assert np.array_equal(sc.smc_gains.lam, [30.0, 30.0])


def test_pair_sets_joints_separately():
    sc = parse_config_text("[controller.smc]\nlambda = 30, 60\n")
    assert np.array_equal(sc.smc_gains.lam, [30.0, 60.0])


def test_reference_kind_choices():
    sc = parse_config_text("[reference]\nkind = step\namplitude = 0.2\n")
    assert sc.reference.kind is ReferenceKind.STEP
    with pytest.raises(UnitError) as info:
        parse_config_text("[reference]\nkind = circle\n")
    assert "sinusoid" in str(info.value)


def test_unknown_section_lists_known_ones():
    with pytest.raises(UnknownKey) as info:
        parse_config_text("[robo]\nm1 = 1\n")
    assert "robot" in str(info.value)


def test_unknown_key_lists_known_ones():
    with pytest.raises(UnknownKey) as info:
        parse_config_text("[sim]\nfoo = 1\n")
    msg = str(info.value)
    assert "foo" in msg and "t_end" in msg


def test_wrong_dimension_unit():
    with pytest.raises(UnitError):
        parse_config_text("[robot]\nl1 = 0.32 kg\n")
    with pytest.raises(UnitError):
        parse_config_text("[robot]\nl1 = 5 parsec\n")


def test_malformed_ini():
    with pytest.raises(ParseError):
        parse_config_text("[robot\nm1 = 1\n")
    with pytest.raises(ParseError):
        parse_config_text("just some words\n")


def test_nonpositive_gain_diagnostic():
    with pytest.raises(UnitError) as info:
        parse_config_text("[controller.smc]\ngamma = 0\n")
    assert "positive" in str(info.value)


def test_bool_and_int_diagnostics():
    with pytest.raises(UnitError):
        parse_config_text("[filter]\nenabled = maybe\n")
    with pytest.raises(UnitError):
        parse_config_text("[disturbance]\nseed = 1.5\n")
    with pytest.raises(UnitError):
        parse_config_text("[disturbance]\nseed = -3\n")


def test_param_uncertainty_scales_plant_only():
    sc = parse_config_text("[sim]\nparam_uncertainty = 0.1\n")
    ctrl, plant = sc.params_controller, sc.params_plant
    assert plant is not ctrl
    assert plant.m1 == pytest.approx(ctrl.m1 * 1.1, rel=1e-12)
    assert plant.l2 == pytest.approx(ctrl.l2 * 1.1, rel=1e-12)
    assert ctrl.m1 == 0.386
    with pytest.raises(UnitError):
        parse_config_text("[sim]\nparam_uncertainty = -1\n")


def test_zero_uncertainty_shares_params_object():
    sc = parse_config_text("")
    assert sc.params_plant is sc.params_controller


def test_switch_options():
    sc = parse_config_text("[sim]\nswitch = saturation\nboundary = 0.02\n")
    assert sc.switch.kind is SwitchKind.SATURATION
    assert sc.switch.boundary == 0.02
    sc = parse_config_text("[sim]\nreaching_on = sigma\n")
    assert sc.switch.reaching_on.value == "sigma"


def test_filter_section_round_trips():
    sc = parse_config_text("[filter]\nenabled = true\nomega0 = 300\n")
    assert sc.filter is not None
    assert sc.filter.omega0 == 300.0
    ini = scenario_to_ini(sc)
    assert "enabled = true" in ini
    assert scenario_fingerprint(parse_config_text(ini)) == scenario_fingerprint(sc)


def test_default_scenario_round_trips():
    sc = default_scenario()
    ini = scenario_to_ini(sc)
    assert "enabled = false" in ini
    assert scenario_fingerprint(parse_config_text(ini)) == scenario_fingerprint(sc)


def test_assorted_overrides_round_trip():
    sc = parse_config_text("""
[sim]
controller = smc
t_end = 2 s
dt_plant = 0.2 ms
coriolis_mode = christoffel
switch = tanh
boundary = 0.03
[disturbance]
kind = band_limited_noise
amplitude = 0.4
seed = 17
[reference]
kind = step
amplitude = 0.3
offset = 0.1, -0.2
""")
    assert sc.controller is ControllerKind.SMC
    ini = scenario_to_ini(sc)
    assert scenario_fingerprint(parse_config_text(ini)) == scenario_fingerprint(sc)


def test_parse_config_reads_file(tmp_path):
    path = tmp_path / "case.ini"
    path.write_text("[sim]\nt_end = 1 s\n")
    assert parse_config(path).t_end == 1.0


def test_config_error_is_value_error():
    # callers may catch the whole family with one except clause
    assert issubclass(UnknownKey, ConfigError)
    assert issubclass(UnitError, ConfigError)
    assert issubclass(ParseError, ConfigError)
    assert issubclass(ConfigError, ValueError)
