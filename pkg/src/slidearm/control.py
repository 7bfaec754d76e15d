"""Sliding-mode torque laws for the two-link arm.

Three controllers share one shape: an acceleration-level command made of model
compensation, linear error feedback, and a switching reaching term, mapped
through the nominal inertia matrix into joint torque,

    tau = M(q) (qdd_ref + feedback + reaching) + N(q, qdot) + G(q).

smc       feedback = lam * edot,           surface sigma = edot + lam e
nismc     feedback = alpha e + beta edot,  surface sigma = edot + z,
          z the running integral of (alpha e + beta edot)
hnismc    nismc plus a correction -xi1 switch(e) - xi2 switch(edot) that only
          engages while the error moves away from zero

All functions are pure: gains, switch settings, and the integral state are
immutable values owned by the caller, so controller instances can be evaluated
from any number of threads at once.  Errors use the convention e = q_ref - q.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .dynamics import (CoriolisMode, JointState, RobotParams, _coriolis_terms,
                       _gravity_terms, _mass_terms, _solve_sym2, _vec2)

__all__ = [
    "HybridGains",
    "IntegralState",
    "NismcGains",
    "ReachingArg",
    "SmcGains",
    "SwitchConfig",
    "SwitchKind",
    "TrackingError",
    "hnismc_command",
    "hnismc_control",
    "integral_update",
    "nismc_command",
    "nismc_control",
    "nismc_surface",
    "smc_command",
    "smc_control",
    "smc_surface",
    "switch",
    "validate_gains",
]

log = logging.getLogger(__name__)


class SwitchKind(Enum):
    SIGN = "sign"
    SATURATION = "saturation"
    TANH = "tanh"


class ReachingArg(Enum):
    """What the reaching term switches on: the raw error or the surface value."""

    ERROR = "error"
    SIGMA = "sigma"


@dataclass(frozen=True)
class SwitchConfig:
    """Switching-function settings shared by all three controllers.

    boundary is the boundary-layer half-width used by SATURATION and TANH;
    SIGN ignores it for switching but analysis uses it as the sigma width
    below which chattering is expected.
    """

    kind: SwitchKind = SwitchKind.SIGN
    boundary: float = 0.05
    reaching_on: ReachingArg = ReachingArg.ERROR

    def __post_init__(self):
        if self.kind is not SwitchKind.SIGN and not self.boundary > 0:
            raise ValueError(
                f"boundary must be > 0 for {self.kind.value} switching, "
                f"got {self.boundary!r}")


def switch(x, cfg: SwitchConfig) -> np.ndarray:
    """Elementwise switching function; odd, bounded by 1, switch(0) = 0."""
    x = np.asarray(x, dtype=float)
    if cfg.kind is SwitchKind.SIGN:
        return np.sign(x)
    if cfg.kind is SwitchKind.SATURATION:
        return np.clip(x / cfg.boundary, -1.0, 1.0)
    return np.tanh(x / cfg.boundary)


@dataclass(frozen=True, eq=False)
class TrackingError:
    """e = q_ref - q and its rate, both shape (2,)."""

    e: np.ndarray
    edot: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "e", _vec2(self.e, "e"))
        object.__setattr__(self, "edot", _vec2(self.edot, "edot"))


def _diag2(x, name: str, minimum_open: bool = True) -> np.ndarray:
    """Diagonal entries of a 2x2 gain matrix as a (2,) array."""
    arr = _vec2(x, name)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} entries must be finite, got {arr}")
    if minimum_open:
        if not np.all(arr > 0):
            raise ValueError(f"{name} entries must be positive, got {arr}")
    elif not np.all(arr >= 0):
        raise ValueError(f"{name} entries must be non-negative, got {arr}")
    return arr


@dataclass(frozen=True, eq=False)
class SmcGains:
    """Diagonal gains of the conventional controller: lam (surface slope), gamma (reaching)."""

    lam: np.ndarray = 50.0
    gamma: np.ndarray = 10.0

    def __post_init__(self):
        object.__setattr__(self, "lam", _diag2(self.lam, "lam"))
        object.__setattr__(self, "gamma", _diag2(self.gamma, "gamma"))


@dataclass(frozen=True, eq=False)
class NismcGains:
    """Diagonal gains of the integral controller: alpha (position), beta (rate), gamma (reaching)."""

    alpha: np.ndarray = 50.0
    beta: np.ndarray = 800.0
    gamma: np.ndarray = 10.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", _diag2(self.alpha, "alpha"))
        object.__setattr__(self, "beta", _diag2(self.beta, "beta"))
        object.__setattr__(self, "gamma", _diag2(self.gamma, "gamma"))


@dataclass(frozen=True, eq=False)
class HybridGains:
    """Integral-controller gains plus the hybrid correction magnitudes xi1, xi2.

    Construction warns (but does not fail) when a reaching gain does not
    dominate xi1 + xi2; see validate_gains.
    """

    base: NismcGains = field(default_factory=NismcGains)
    xi1: np.ndarray = 0.05
    xi2: np.ndarray = 0.05

    def __post_init__(self):
        object.__setattr__(self, "xi1", _diag2(self.xi1, "xi1", minimum_open=False))
        object.__setattr__(self, "xi2", _diag2(self.xi2, "xi2", minimum_open=False))
        for msg in validate_gains(self):
            log.warning("%s", msg)


def validate_gains(g: HybridGains) -> list[str]:
    """Empirical-stability screen: each reaching gain must exceed xi1 + xi2.

    Returns one message per violating joint; an empty list means the margin
    holds.  Violations degrade the guaranteed decrease of the surface energy,
    they do not make construction fail.
    """
    msgs = []
    for i in range(2):
        margin = g.xi1[i] + g.xi2[i]
        if g.base.gamma[i] <= margin:
            msgs.append(
                f"joint {i + 1}: reaching gain {g.base.gamma[i]:g} does not exceed "
                f"the hybrid correction xi1+xi2 = {margin:g}; "
                "the surface-energy decrease is no longer guaranteed")
    return msgs


@dataclass(frozen=True, eq=False)
class IntegralState:
    """Caller-owned accumulator for the integral surface; starts at zero."""

    z: np.ndarray = field(default_factory=lambda: np.zeros(2))
    t_last: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "z", _vec2(self.z, "z"))


def integral_update(st: IntegralState, err: TrackingError, g: NismcGains,
                    dt: float) -> IntegralState:
    """One rectangle-rule step: z += dt (alpha e + beta edot).  dt must be > 0."""
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    z = st.z + dt * (g.alpha * err.e + g.beta * err.edot)
    return IntegralState(z=z, t_last=st.t_last + dt)


def smc_surface(err: TrackingError, g: SmcGains) -> np.ndarray:
    return err.edot + g.lam * err.e


def nismc_surface(err: TrackingError, st: IntegralState) -> np.ndarray:
    return err.edot + st.z


def _model_terms(p: RobotParams, s: JointState, mode: CoriolisMode):
    m11, m12, m22 = _mass_terms(p, math.cos(s.q[1]))
    n1, n2 = _coriolis_terms(p, math.sin(s.q[1]), s.qdot[0], s.qdot[1],
                             mode is CoriolisMode.CHRISTOFFEL)
    g1, g2 = _gravity_terms(p, s.q[0], s.q[1])
    return (m11, m12, m22), np.array([n1, n2]), np.array([g1, g2])


def _apply_inertia(m, a_cmd, n_vec, g_vec) -> np.ndarray:
    m11, m12, m22 = m
    return np.array([
        m11 * a_cmd[0] + m12 * a_cmd[1] + n_vec[0] + g_vec[0],
        m12 * a_cmd[0] + m22 * a_cmd[1] + n_vec[1] + g_vec[1],
    ])


def _model_accel(m, n_vec, g_vec) -> np.ndarray:
    a1, a2 = _solve_sym2(m[0], m[1], m[2], n_vec[0] + g_vec[0],
                         n_vec[1] + g_vec[1])
    return np.array([a1, a2])


def _smc_accel(ref, err: TrackingError, g: SmcGains, sw: SwitchConfig) -> np.ndarray:
    arg = smc_surface(err, g) if sw.reaching_on is ReachingArg.SIGMA else err.e
    return ref[2] + g.lam * err.edot + g.gamma * switch(arg, sw)


def smc_control(p: RobotParams, s: JointState, ref, g: SmcGains,
                sw: SwitchConfig, mode: CoriolisMode = CoriolisMode.TABULATED) -> np.ndarray:
    """Conventional sliding-mode torque.

    ref is the (q_ref, qdot_ref, qddot_ref) triple; the tracking error is
    formed here from the supplied state.  With a matched model, zero
    disturbance, and zero error the command reduces to plain inverse dynamics.
    """
    err = TrackingError(ref[0] - s.q, ref[1] - s.qdot)
    m, n_vec, g_vec = _model_terms(p, s, mode)
    return _apply_inertia(m, _smc_accel(ref, err, g, sw), n_vec, g_vec)


def smc_command(p: RobotParams, s: JointState, ref, g: SmcGains,
                sw: SwitchConfig, mode: CoriolisMode = CoriolisMode.TABULATED) -> np.ndarray:
    """Acceleration-level command of smc_control, model compensation included.

    smc_control equals inertia times this command up to rounding; the split
    exists so per-joint structure can be inspected without the inertia
    coupling.
    """
    err = TrackingError(ref[0] - s.q, ref[1] - s.qdot)
    m, n_vec, g_vec = _model_terms(p, s, mode)
    return _smc_accel(ref, err, g, sw) + _model_accel(m, n_vec, g_vec)


def _nismc_accel(ref, st: IntegralState, err: TrackingError, g: NismcGains,
                 sw: SwitchConfig) -> np.ndarray:
    arg = nismc_surface(err, st) if sw.reaching_on is ReachingArg.SIGMA else err.e
    return ref[2] + g.alpha * err.e + g.beta * err.edot + g.gamma * switch(arg, sw)


def nismc_control(p: RobotParams, s: JointState, ref, st: IntegralState,
                  err: TrackingError, g: NismcGains, sw: SwitchConfig,
                  mode: CoriolisMode = CoriolisMode.TABULATED) -> np.ndarray:
    """Integral sliding-mode torque.

    err is passed in rather than recomputed so the caller may feed filtered
    measurements; st must already include the integral step for this sample.
    """
    m, n_vec, g_vec = _model_terms(p, s, mode)
    return _apply_inertia(m, _nismc_accel(ref, st, err, g, sw), n_vec, g_vec)


def nismc_command(p: RobotParams, s: JointState, ref, st: IntegralState,
                  err: TrackingError, g: NismcGains, sw: SwitchConfig,
                  mode: CoriolisMode = CoriolisMode.TABULATED) -> np.ndarray:
    """Acceleration-level command of nismc_control (see smc_command)."""
    m, n_vec, g_vec = _model_terms(p, s, mode)
    return _nismc_accel(ref, st, err, g, sw) + _model_accel(m, n_vec, g_vec)


def _hybrid_extra(err: TrackingError, g: HybridGains, sw: SwitchConfig) -> np.ndarray:
    # Engages only while |e| grows: switch(e) and switch(edot) share a sign.
    return -g.xi1 * switch(err.e, sw) - g.xi2 * switch(err.edot, sw)


def hnismc_control(p: RobotParams, s: JointState, ref, st: IntegralState,
                   err: TrackingError, g: HybridGains, sw: SwitchConfig,
                   mode: CoriolisMode = CoriolisMode.TABULATED) -> np.ndarray:
    """Hybrid integral sliding-mode torque: the nismc law plus the xi correction.

    With xi1 = xi2 = 0 the output is identical to nismc_control with g.base.
    """
    m, n_vec, g_vec = _model_terms(p, s, mode)
    a_cmd = _nismc_accel(ref, st, err, g.base, sw) + _hybrid_extra(err, g, sw)
    return _apply_inertia(m, a_cmd, n_vec, g_vec)


def hnismc_command(p: RobotParams, s: JointState, ref, st: IntegralState,
                   err: TrackingError, g: HybridGains, sw: SwitchConfig,
                   mode: CoriolisMode = CoriolisMode.TABULATED) -> np.ndarray:
    """Acceleration-level command of hnismc_control (see smc_command)."""
    m, n_vec, g_vec = _model_terms(p, s, mode)
    a_cmd = _nismc_accel(ref, st, err, g.base, sw) + _hybrid_extra(err, g, sw)
    return a_cmd + _model_accel(m, n_vec, g_vec)
