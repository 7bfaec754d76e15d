"""INI configuration for scenarios.

Eight sections mirror the scenario structure: [robot], [controller.smc],
[controller.nismc], [controller.hnismc], [reference], [disturbance], [sim],
[filter].  Values accept unit suffixes from the source conventions (mm, cm,
m; g, gr, kg; ms, s; deg, rad) and are converted to SI on load.  Gains and
per-joint quantities take either one value (both joints) or a comma pair.

Missing keys fall back to documented defaults and each fallback is logged
with its provenance; unknown sections or keys are hard errors so typos never
pass silently.  An empty file yields the full default scenario.
"""

import configparser
import logging
import math

import numpy as np

from .control import (HybridGains, NismcGains, ReachingArg, SmcGains,
                      SwitchConfig, SwitchKind)
from .dynamics import CoriolisMode, JointState, RobotParams
from .sim import (ControllerKind, DisturbanceKind, DisturbanceModel,
                  FilterParams, ReferenceKind, ReferenceSpec, Scenario)

__all__ = [
    "ConfigError",
    "ParseError",
    "UnitError",
    "UnknownKey",
    "default_scenario",
    "parse_config",
    "parse_config_text",
    "scenario_to_ini",
]

log = logging.getLogger(__name__)

# provenance tags for defaulted keys
BENCH = "benchmark preset"
LIB = "library default"


class ConfigError(ValueError):
    """Base of all configuration failures; message carries a one-line remedy."""


class ParseError(ConfigError):
    pass


class UnknownKey(ConfigError):
    pass


class UnitError(ConfigError):
    pass


_LENGTH = {"mm": 1e-3, "cm": 1e-2, "m": 1.0}
_MASS = {"g": 1e-3, "gr": 1e-3, "kg": 1.0}
_TIME = {"ms": 1e-3, "s": 1.0}
_ANGLE = {"deg": math.pi / 180.0, "rad": 1.0}


def _strip_unit(text: str, units: dict, key: str) -> float:
    """One scalar with an optional unit suffix, converted to SI."""
    t = text.strip()
    factor = 1.0
    # longest suffix first so 'mm' is not read as 'm'
    for suf in sorted(units, key=len, reverse=True):
        if t.endswith(suf):
            head = t[: -len(suf)].strip()
            if head and (head[-1].isdigit() or head[-1] == "."):
                t = head
                factor = units[suf]
                break
    try:
        return float(t) * factor
    except ValueError:
        allowed = ", ".join(sorted(units)) if units else "none"
        raise UnitError(
            f"{key}: cannot read {text!r} as a number; "
            f"allowed unit suffixes: {allowed}") from None


def _scalar(text: str, key: str, units: dict = {}) -> float:
    v = _strip_unit(text, units, key)
    if not math.isfinite(v):
        raise UnitError(f"{key}: value must be finite, got {text!r}")
    return v


def _positive(text: str, key: str, units: dict = {}) -> float:
    v = _scalar(text, key, units)
    if not v > 0:
        raise UnitError(f"{key}: value must be > 0, got {text!r}")
    return v


def _pair(text: str, key: str, units: dict = {}) -> np.ndarray:
    """One value (both joints) or 'a, b' (per joint)."""
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) == 1:
        return np.full(2, _scalar(parts[0], key, units))
    if len(parts) == 2:
        return np.array([_scalar(p, key, units) for p in parts])
    raise UnitError(
        f"{key}: expected one value or a comma pair, got {text!r}")


def _int_value(text: str, key: str) -> int:
    try:
        return int(text.strip(), 0)
    except ValueError:
        raise UnitError(f"{key}: expected an integer, got {text!r}") from None


_BOOL = {"1": True, "yes": True, "true": True, "on": True,
         "0": False, "no": False, "false": False, "off": False}


def _bool_value(text: str, key: str) -> bool:
    v = _BOOL.get(text.strip().lower())
    if v is None:
        raise UnitError(f"{key}: expected true/false, got {text!r}")
    return v


def _enum_value(text: str, enum, key: str):
    t = text.strip().lower()
    for member in enum:
        if member.value == t:
            return member
    allowed = ", ".join(m.value for m in enum)
    raise UnitError(f"{key}: unknown choice {text!r}; one of: {allowed}")


# Schema: section -> key -> (default-as-text, provenance).  Defaults are
# stated in the same syntax the file accepts, so the documented default and
# the parsed default cannot drift apart.
_SCHEMA = {
    "robot": {
        "m1": ("0.386 kg", BENCH),
        "m2": ("0.722 kg", BENCH),
        "l1": ("0.32 m", BENCH),
        "l2": ("0.36 m", BENCH),
        "gravity": ("9.81", LIB),
    },
    "controller.smc": {
        "lambda": ("50", BENCH),
        "gamma": ("10", BENCH),
    },
    "controller.nismc": {
        "alpha": ("50", BENCH),
        "beta": ("800", BENCH),
        "gamma": ("10", BENCH),
    },
    "controller.hnismc": {
        "xi1": ("0.05", BENCH),
        "xi2": ("0.05", BENCH),
    },
    "reference": {
        "kind": ("sinusoid", LIB),
        "amplitude": ("0.5 rad", LIB),
        "frequency": ("1.0", LIB),
        "phase": ("0 rad", LIB),
        "offset": ("0 rad", LIB),
    },
    "disturbance": {
        "kind": ("viscous_coulomb", LIB),
        "constant": ("0", LIB),
        "amplitude": ("0", LIB),
        "frequency": ("0", LIB),
        "phase": ("0 rad", LIB),
        "c_v": ("0.05", LIB),
        "c_c": ("0.1", LIB),
        "seed": ("0", LIB),
        "cutoff": ("20.0", LIB),
        "n_modes": ("16", LIB),
    },
    "sim": {
        "controller": ("hnismc", LIB),
        "t_end": ("10 s", LIB),
        "dt_plant": ("1e-4 s", LIB),
        "dt_control": ("1.25 ms", BENCH),
        "coriolis_mode": ("tabulated", LIB),
        "initial_q": ("0, 0", LIB),
        "initial_qdot": ("0, 0", LIB),
        "switch": ("sign", LIB),
        "boundary": ("0.05", LIB),
        "reaching_on": ("error", LIB),
        "param_uncertainty": ("0", LIB),
    },
    "filter": {
        "enabled": ("false", LIB),
        "zeta": ("0.9", BENCH),
        "omega0": ("30.0", BENCH),
        "sample_dt": ("1 ms", BENCH),
        "on_position": ("true", LIB),
        "on_velocity": ("true", LIB),
    },
}


class _Resolver:
    """Reads keys from one parsed file, logging defaults and tracking use."""

    def __init__(self, cp: configparser.ConfigParser):
        self.cp = cp

    def get(self, section: str, key: str) -> str:
        if self.cp.has_option(section, key):
            return self.cp.get(section, key)
        text, provenance = _SCHEMA[section][key]
        log.info("config: [%s] %s defaulted to %r (%s)",
                 section, key, text, provenance)
        return text

    def check_unknown(self):
        for section in self.cp.sections():
            if section not in _SCHEMA:
                allowed = ", ".join(_SCHEMA)
                raise UnknownKey(
                    f"unknown section [{section}]; sections are: {allowed}")
            for key in self.cp.options(section):
                if key not in _SCHEMA[section]:
                    allowed = ", ".join(_SCHEMA[section])
                    raise UnknownKey(
                        f"unknown key {key!r} in [{section}]; "
                        f"keys are: {allowed}")


def _build_scenario(r: _Resolver) -> Scenario:
    try:
        params = RobotParams(
            m1=_positive(r.get("robot", "m1"), "robot.m1", _MASS),
            m2=_positive(r.get("robot", "m2"), "robot.m2", _MASS),
            l1=_positive(r.get("robot", "l1"), "robot.l1", _LENGTH),
            l2=_positive(r.get("robot", "l2"), "robot.l2", _LENGTH),
            gravity=_scalar(r.get("robot", "gravity"), "robot.gravity"),
        )

        def gains(section, key):
            arr = _pair(r.get(section, key), f"{section}.{key}")
            if not np.all(arr > 0):
                raise UnitError(
                    f"{section}.{key}: gain entries must be > 0, got {arr}; "
                    "use positive diagonal gains")
            return arr

        def nonneg(section, key):
            arr = _pair(r.get(section, key), f"{section}.{key}")
            if not np.all(arr >= 0):
                raise UnitError(
                    f"{section}.{key}: entries must be >= 0, got {arr}")
            return arr

        smc = SmcGains(lam=gains("controller.smc", "lambda"),
                       gamma=gains("controller.smc", "gamma"))
        nismc = NismcGains(alpha=gains("controller.nismc", "alpha"),
                           beta=gains("controller.nismc", "beta"),
                           gamma=gains("controller.nismc", "gamma"))
        hybrid = HybridGains(base=nismc,
                             xi1=nonneg("controller.hnismc", "xi1"),
                             xi2=nonneg("controller.hnismc", "xi2"))

        ref = ReferenceSpec(
            kind=_enum_value(r.get("reference", "kind"), ReferenceKind,
                             "reference.kind"),
            amplitude=_pair(r.get("reference", "amplitude"),
                            "reference.amplitude", _ANGLE),
            frequency=_pair(r.get("reference", "frequency"),
                            "reference.frequency"),
            phase=_pair(r.get("reference", "phase"), "reference.phase",
                        _ANGLE),
            offset=_pair(r.get("reference", "offset"), "reference.offset",
                         _ANGLE),
        )

        dist = DisturbanceModel(
            kind=_enum_value(r.get("disturbance", "kind"), DisturbanceKind,
                             "disturbance.kind"),
            constant=_pair(r.get("disturbance", "constant"),
                           "disturbance.constant"),
            amplitude=_pair(r.get("disturbance", "amplitude"),
                            "disturbance.amplitude"),
            frequency=_pair(r.get("disturbance", "frequency"),
                            "disturbance.frequency"),
            phase=_pair(r.get("disturbance", "phase"), "disturbance.phase",
                        _ANGLE),
            c_v=nonneg("disturbance", "c_v"),
            c_c=nonneg("disturbance", "c_c"),
            seed=_int_value(r.get("disturbance", "seed"), "disturbance.seed"),
            cutoff=_positive(r.get("disturbance", "cutoff"),
                             "disturbance.cutoff"),
            n_modes=_int_value(r.get("disturbance", "n_modes"),
                               "disturbance.n_modes"),
        )

        switch = SwitchConfig(
            kind=_enum_value(r.get("sim", "switch"), SwitchKind, "sim.switch"),
            boundary=_positive(r.get("sim", "boundary"), "sim.boundary"),
            reaching_on=_enum_value(r.get("sim", "reaching_on"), ReachingArg,
                                    "sim.reaching_on"),
        )

        uncertainty = _scalar(r.get("sim", "param_uncertainty"),
                              "sim.param_uncertainty")
        if not uncertainty > -1.0:
            raise UnitError(
                "sim.param_uncertainty: must be > -1 "
                f"(plant scale stays positive), got {uncertainty!r}")
        plant = params if uncertainty == 0.0 else params.scaled(1.0 + uncertainty)

        if _bool_value(r.get("filter", "enabled"), "filter.enabled"):
            filt = FilterParams(
                zeta=_positive(r.get("filter", "zeta"), "filter.zeta"),
                omega0=_positive(r.get("filter", "omega0"), "filter.omega0"),
                sample_dt=_positive(r.get("filter", "sample_dt"),
                                    "filter.sample_dt", _TIME),
                on_position=_bool_value(r.get("filter", "on_position"),
                                        "filter.on_position"),
                on_velocity=_bool_value(r.get("filter", "on_velocity"),
                                        "filter.on_velocity"),
            )
        else:
            filt = None

        return Scenario(
            params_controller=params,
            params_plant=plant,
            controller=_enum_value(r.get("sim", "controller"), ControllerKind,
                                   "sim.controller"),
            smc_gains=smc,
            nismc_gains=nismc,
            hybrid_gains=hybrid,
            reference=ref,
            disturbance=dist,
            switch=switch,
            coriolis_mode=_enum_value(r.get("sim", "coriolis_mode"),
                                      CoriolisMode, "sim.coriolis_mode"),
            initial=JointState(
                _pair(r.get("sim", "initial_q"), "sim.initial_q", _ANGLE),
                _pair(r.get("sim", "initial_qdot"), "sim.initial_qdot")),
            t_end=_scalar(r.get("sim", "t_end"), "sim.t_end", _TIME),
            dt_plant=_positive(r.get("sim", "dt_plant"), "sim.dt_plant", _TIME),
            dt_control=_positive(r.get("sim", "dt_control"), "sim.dt_control",
                                 _TIME),
            filter=filt,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        # scenario/type validation differs from per-key unit errors
        raise UnitError(f"invalid configuration: {exc}") from exc


def parse_config_text(text: str, origin: str = "<config>") -> Scenario:
    """Parse INI text into a fully resolved Scenario."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text, source=origin)
    except configparser.Error as exc:
        raise ParseError(
            f"{exc}; fix the INI syntax at the named line") from exc
    r = _Resolver(cp)
    r.check_unknown()
    return _build_scenario(r)


def parse_config(path) -> Scenario:
    """Parse an INI file into a fully resolved Scenario."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), origin=str(path))


def default_scenario() -> Scenario:
    """The scenario an empty configuration file resolves to."""
    return parse_config_text("")


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _fmt_pair(arr) -> str:
    return f"{_fmt(float(arr[0]))}, {_fmt(float(arr[1]))}"


def scenario_to_ini(sc: Scenario) -> str:
    """Render a Scenario as INI text that parse_config_text reads back.

    All values are explicit (no defaults left implicit) so the output is a
    self-describing record of a run.  param_uncertainty is emitted as the
    plant/controller scale ratio it was built from.
    """
    p = sc.params_controller
    ratio = sc.params_plant.m1 / p.m1
    uncertainty = 0.0 if sc.params_plant is p else ratio - 1.0
    ref = sc.reference
    d = sc.disturbance
    sw = sc.switch
    lines = [
        "[robot]",
        f"m1 = {_fmt(p.m1)}",
        f"m2 = {_fmt(p.m2)}",
        f"l1 = {_fmt(p.l1)}",
        f"l2 = {_fmt(p.l2)}",
        f"gravity = {_fmt(p.gravity)}",
        "",
        "[controller.smc]",
        f"lambda = {_fmt_pair(sc.smc_gains.lam)}",
        f"gamma = {_fmt_pair(sc.smc_gains.gamma)}",
        "",
        "[controller.nismc]",
        f"alpha = {_fmt_pair(sc.nismc_gains.alpha)}",
        f"beta = {_fmt_pair(sc.nismc_gains.beta)}",
        f"gamma = {_fmt_pair(sc.nismc_gains.gamma)}",
        "",
        "[controller.hnismc]",
        f"xi1 = {_fmt_pair(sc.hybrid_gains.xi1)}",
        f"xi2 = {_fmt_pair(sc.hybrid_gains.xi2)}",
        "",
        "[reference]",
        f"kind = {ref.kind.value}",
        f"amplitude = {_fmt_pair(ref.amplitude)}",
        f"frequency = {_fmt_pair(ref.frequency)}",
        f"phase = {_fmt_pair(ref.phase)}",
        f"offset = {_fmt_pair(ref.offset)}",
        "",
        "[disturbance]",
        f"kind = {d.kind.value}",
        f"constant = {_fmt_pair(d.constant)}",
        f"amplitude = {_fmt_pair(d.amplitude)}",
        f"frequency = {_fmt_pair(d.frequency)}",
        f"phase = {_fmt_pair(d.phase)}",
        f"c_v = {_fmt_pair(d.c_v)}",
        f"c_c = {_fmt_pair(d.c_c)}",
        f"seed = {d.seed}",
        f"cutoff = {_fmt(d.cutoff)}",
        f"n_modes = {d.n_modes}",
        "",
        "[sim]",
        f"controller = {sc.controller.value}",
        f"t_end = {_fmt(sc.t_end)}",
        f"dt_plant = {_fmt(sc.dt_plant)}",
        f"dt_control = {_fmt(sc.dt_control)}",
        f"coriolis_mode = {sc.coriolis_mode.value}",
        f"initial_q = {_fmt_pair(sc.initial.q)}",
        f"initial_qdot = {_fmt_pair(sc.initial.qdot)}",
        f"switch = {sw.kind.value}",
        f"boundary = {_fmt(sw.boundary)}",
        f"reaching_on = {sw.reaching_on.value}",
        f"param_uncertainty = {_fmt(uncertainty)}",
        "",
        "[filter]",
    ]
    if sc.filter is None:
        lines.append("enabled = false")
    else:
        f = sc.filter
        lines += [
            "enabled = true",
            f"zeta = {_fmt(f.zeta)}",
            f"omega0 = {_fmt(f.omega0)}",
            f"sample_dt = {_fmt(f.sample_dt)}",
            f"on_position = {'true' if f.on_position else 'false'}",
            f"on_velocity = {'true' if f.on_velocity else 'false'}",
        ]
    lines.append("")
    return "\n".join(lines)
