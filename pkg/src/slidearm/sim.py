"""Closed-loop simulation of the arm under the three torque laws.

The loop runs two clocks: the plant integrates with classical fixed-step RK4
at dt_plant, the controller recomputes torque at dt_control and the value is
held between updates (zero-order hold).  Controller updates happen at the
exact times j * dt_control; when such a time falls strictly inside a plant
step the step is split there, so the update schedule does not move when
dt_plant is refined.  An optional second-order low-pass filter sits between
the plant state and the controller.

Everything is deterministic: no wall clock, no global random state, plain
IEEE arithmetic in a fixed order.  Two runs of one Scenario give
bitwise-identical traces.
"""

import hashlib
import logging
import math
from dataclasses import dataclass, field, fields, replace
from enum import Enum

import numpy as np

from .control import (HybridGains, IntegralState, NismcGains, ReachingArg,
                      SmcGains, SwitchConfig, SwitchKind, TrackingError,
                      hnismc_control, integral_update, nismc_control,
                      smc_control, validate_gains)
from .dynamics import (RCOND_LIMIT, CoriolisMode, JointState, RobotParams,
                       SingularMass, _vec2)

__all__ = [
    "ControllerKind",
    "DisturbanceKind",
    "DisturbanceModel",
    "FilterParams",
    "NonFiniteState",
    "ReferenceKind",
    "ReferenceSpec",
    "Scenario",
    "Trace",
    "disturbance",
    "filter_init",
    "filter_step",
    "reference",
    "rk4_step",
    "run_simulation",
    "scenario_fingerprint",
]

log = logging.getLogger(__name__)


class NonFiniteState(RuntimeError):
    """Integration produced NaN/Inf.  t is the offending time; trace holds the
    rows recorded up to the last finite state (None outside run_simulation)."""

    def __init__(self, t: float, trace=None):
        super().__init__(f"state became non-finite at t = {t:.9g} s")
        self.t = t
        self.trace = trace


# ---------------------------------------------------------------------------
# reference trajectories

class ReferenceKind(Enum):
    SINUSOID = "sinusoid"
    STEP = "step"
    HOLD = "hold"


@dataclass(frozen=True, eq=False)
class ReferenceSpec:
    """Per-joint reference q_ref(t) with analytic derivatives.

    sinusoid: offset + amplitude * sin(frequency t + phase)
    step:     offset + amplitude from t = 0 on (derivatives zero by convention)
    hold:     offset (amplitude unused)
    """

    kind: ReferenceKind = ReferenceKind.SINUSOID
    amplitude: np.ndarray = 0.5
    frequency: np.ndarray = 1.0
    phase: np.ndarray = 0.0
    offset: np.ndarray = 0.0

    def __post_init__(self):
        object.__setattr__(self, "amplitude", _vec2(self.amplitude, "amplitude"))
        object.__setattr__(self, "frequency", _vec2(self.frequency, "frequency"))
        object.__setattr__(self, "phase", _vec2(self.phase, "phase"))
        object.__setattr__(self, "offset", _vec2(self.offset, "offset"))
        if not np.all(self.frequency >= 0):
            raise ValueError(f"frequency must be non-negative, got {self.frequency}")


def reference(spec: ReferenceSpec, t: float):
    """(q_ref, qdot_ref, qddot_ref) at time t, each shape (2,)."""
    if spec.kind is ReferenceKind.SINUSOID:
        ph = spec.frequency * t + spec.phase
        q = spec.offset + spec.amplitude * np.sin(ph)
        qd = spec.amplitude * spec.frequency * np.cos(ph)
        qdd = -spec.amplitude * spec.frequency * spec.frequency * np.sin(ph)
        return q, qd, qdd
    zero = np.zeros(2)
    if spec.kind is ReferenceKind.STEP:
        return spec.offset + spec.amplitude, zero, zero.copy()
    return spec.offset.copy(), zero, zero.copy()


# ---------------------------------------------------------------------------
# disturbances

class DisturbanceKind(Enum):
    NONE = "none"
    CONSTANT = "constant"
    SINUSOID_TORQUE = "sinusoid_torque"
    VISCOUS_COULOMB = "viscous_coulomb"
    BAND_LIMITED_NOISE = "band_limited_noise"


@dataclass(frozen=True, eq=False)
class DisturbanceModel:
    """Lumped acceleration-level disturbance d(t) added to the plant.

    constant:          d = constant (rad/s^2)
    sinusoid_torque:   a torque sinusoid amplitude*sin(frequency t + phase),
                       mapped through the plant inertia inverse
    viscous_coulomb:   friction torque -(c_v qdot + c_c sign(qdot)), mapped
                       through the plant inertia inverse
    band_limited_noise: a seeded random-phase multisine per joint with modes
                       drawn below ``cutoff`` (rad/s) and RMS ``amplitude``;
                       smooth, band-limited, and a pure function of t, so runs
                       with equal seeds match bitwise
    """

    kind: DisturbanceKind = DisturbanceKind.NONE
    constant: np.ndarray = 0.0
    amplitude: np.ndarray = 0.0
    frequency: np.ndarray = 0.0
    phase: np.ndarray = 0.0
    c_v: np.ndarray = 0.05
    c_c: np.ndarray = 0.1
    seed: int = 0
    cutoff: float = 20.0
    n_modes: int = 16

    def __post_init__(self):
        for name in ("constant", "amplitude", "frequency", "phase", "c_v", "c_c"):
            object.__setattr__(self, name, _vec2(getattr(self, name), name))
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2 ** 64):
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if not self.cutoff > 0:
            raise ValueError(f"cutoff must be > 0, got {self.cutoff!r}")
        if not (isinstance(self.n_modes, int) and self.n_modes > 0):
            raise ValueError(f"n_modes must be a positive integer, got {self.n_modes!r}")
        if self.kind is DisturbanceKind.BAND_LIMITED_NOISE:
            rng = np.random.default_rng(self.seed)
            freqs = rng.uniform(0.0, self.cutoff, size=(2, self.n_modes))
            phases = rng.uniform(0.0, 2.0 * math.pi, size=(2, self.n_modes))
            object.__setattr__(self, "_noise_freqs", freqs)
            object.__setattr__(self, "_noise_phases", phases)

    @classmethod
    def none(cls) -> "DisturbanceModel":
        return cls()

    @classmethod
    def constant_accel(cls, value) -> "DisturbanceModel":
        return cls(kind=DisturbanceKind.CONSTANT, constant=value)

    @classmethod
    def sinusoid_torque(cls, amplitude, frequency, phase=0.0) -> "DisturbanceModel":
        return cls(kind=DisturbanceKind.SINUSOID_TORQUE, amplitude=amplitude,
                   frequency=frequency, phase=phase)

    @classmethod
    def viscous_coulomb(cls, c_v=0.05, c_c=0.1) -> "DisturbanceModel":
        return cls(kind=DisturbanceKind.VISCOUS_COULOMB, c_v=c_v, c_c=c_c)

    @classmethod
    def band_limited_noise(cls, amplitude, cutoff=20.0, seed=0,
                           n_modes=16) -> "DisturbanceModel":
        return cls(kind=DisturbanceKind.BAND_LIMITED_NOISE, amplitude=amplitude,
                   cutoff=cutoff, seed=seed, n_modes=n_modes)


def _make_disturbance_fn(model: DisturbanceModel, plant: RobotParams):
    """Scalar closure (t, q1, q2, w1, w2) -> (d1, d2) in rad/s^2."""
    kind = model.kind
    if kind is DisturbanceKind.NONE:
        return lambda t, q1, q2, w1, w2: (0.0, 0.0)
    if kind is DisturbanceKind.CONSTANT:
        c1, c2 = float(model.constant[0]), float(model.constant[1])
        return lambda t, q1, q2, w1, w2: (c1, c2)

    # Torque-level kinds share the inertia solve of the plant parameters.
    a = plant.m2 * plant.l1 * plant.l2
    mc = plant.m2 * plant.l2 * plant.l2
    mbase = (plant.m1 + plant.m2) * plant.l1 * plant.l1 + mc

    def _minv(q2v, b1, b2):
        cth = math.cos(q2v)
        m11 = mbase + 2.0 * a * cth
        m12 = mc + a * cth
        det = m11 * mc - m12 * m12
        return (mc * b1 - m12 * b2) / det, (m11 * b2 - m12 * b1) / det

    if kind is DisturbanceKind.SINUSOID_TORQUE:
        a1, a2 = float(model.amplitude[0]), float(model.amplitude[1])
        f1, f2 = float(model.frequency[0]), float(model.frequency[1])
        p1, p2 = float(model.phase[0]), float(model.phase[1])

        def sin_torque(t, q1, q2, w1, w2):
            return _minv(q2, a1 * math.sin(f1 * t + p1), a2 * math.sin(f2 * t + p2))

        return sin_torque

    if kind is DisturbanceKind.VISCOUS_COULOMB:
        cv1, cv2 = float(model.c_v[0]), float(model.c_v[1])
        cc1, cc2 = float(model.c_c[0]), float(model.c_c[1])

        def friction(t, q1, q2, w1, w2):
            s1 = 0.0 if w1 == 0.0 else math.copysign(1.0, w1)
            s2 = 0.0 if w2 == 0.0 else math.copysign(1.0, w2)
            return _minv(q2, -(cv1 * w1 + cc1 * s1), -(cv2 * w2 + cc2 * s2))

        return friction

    # band-limited noise: amplitude-normalized multisine at acceleration level
    freqs = model._noise_freqs
    phases = model._noise_phases
    scale1 = float(model.amplitude[0]) * math.sqrt(2.0 / model.n_modes)
    scale2 = float(model.amplitude[1]) * math.sqrt(2.0 / model.n_modes)
    f1 = [float(v) for v in freqs[0]]
    f2 = [float(v) for v in freqs[1]]
    ph1 = [float(v) for v in phases[0]]
    ph2 = [float(v) for v in phases[1]]
    sin = math.sin

    def noise(t, q1, q2, w1, w2):
        acc1 = 0.0
        acc2 = 0.0
        for fv, pv in zip(f1, ph1):
            acc1 += sin(fv * t + pv)
        for fv, pv in zip(f2, ph2):
            acc2 += sin(fv * t + pv)
        return scale1 * acc1, scale2 * acc2

    return noise


def disturbance(model: DisturbanceModel, t: float, s: JointState,
                plant: RobotParams | None = None) -> np.ndarray:
    """Disturbance sample d(t) for state ``s``, shape (2,) in rad/s^2.

    Torque-level kinds need the plant parameters for the inertia mapping;
    ``plant`` defaults to the benchmark values.
    """
    fn = _make_disturbance_fn(model, plant if plant is not None else RobotParams())
    d1, d2 = fn(t, s.q[0], s.q[1], s.qdot[0], s.qdot[1])
    return np.array([d1, d2])


# ---------------------------------------------------------------------------
# measurement filter

@dataclass(frozen=True)
class FilterParams:
    """Second-order low-pass w0^2 / (s^2 + 2 zeta w0 s + w0^2), discretized by
    RK4 with a zero-order-held input at sample_dt.

    on_position / on_velocity choose which measurement channels pass through
    the filter on their way to the controller.
    """

    zeta: float = 0.9
    omega0: float = 30.0
    sample_dt: float = 1e-3
    on_position: bool = True
    on_velocity: bool = True

    def __post_init__(self):
        if not (self.zeta > 0 and self.omega0 > 0 and self.sample_dt > 0):
            raise ValueError("zeta, omega0 and sample_dt must all be > 0")

    @classmethod
    def motion(cls) -> "FilterParams":
        """Preset used for position/velocity feedback."""
        return cls(zeta=0.9, omega0=30.0, sample_dt=1e-3)

    @classmethod
    def current_path(cls) -> "FilterParams":
        """Preset matching the much faster actuator-current path; kept for
        completeness, the simulation does not model that loop."""
        return cls(zeta=0.9, omega0=3000.0, sample_dt=1e-3)


def filter_init(sample) -> np.ndarray:
    """Filter state settled at ``sample``: output = sample, rate = 0."""
    sample = np.asarray(sample, dtype=float)
    return np.stack([sample, np.zeros_like(sample)])


def filter_step(state: np.ndarray, u, fp: FilterParams):
    """Advance the filter one sample with held input ``u``.

    state has shape (2, ...) holding [output, output-rate] per channel; u
    broadcasts against state[0].  Returns (new_state, new_output).
    """
    state = np.asarray(state, dtype=float)
    u = np.asarray(u, dtype=float)
    w0 = fp.omega0
    tzw = 2.0 * fp.zeta * w0
    w0sq = w0 * w0
    h = fp.sample_dt
    y, v = state[0], state[1]

    k1y = v
    k1v = w0sq * (u - y) - tzw * v
    y2 = y + 0.5 * h * k1y
    v2 = v + 0.5 * h * k1v
    k2y = v2
    k2v = w0sq * (u - y2) - tzw * v2
    y3 = y + 0.5 * h * k2y
    v3 = v + 0.5 * h * k2v
    k3y = v3
    k3v = w0sq * (u - y3) - tzw * v3
    y4 = y + h * k3y
    v4 = v + h * k3v
    k4y = v4
    k4v = w0sq * (u - y4) - tzw * v4

    yn = y + (h / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
    vn = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return np.stack([yn, vn]), yn


# ---------------------------------------------------------------------------
# integrator

def rk4_step(f, y: np.ndarray, t: float, dt: float) -> np.ndarray:
    """One classical RK4 step of y' = f(t, y).

    Raises NonFiniteState when the step produces NaN/Inf, reporting t + dt.
    """
    y = np.asarray(y, dtype=float)
    k1 = np.asarray(f(t, y), dtype=float)
    k2 = np.asarray(f(t + 0.5 * dt, y + 0.5 * dt * k1), dtype=float)
    k3 = np.asarray(f(t + 0.5 * dt, y + 0.5 * dt * k2), dtype=float)
    k4 = np.asarray(f(t + dt, y + dt * k3), dtype=float)
    out = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise NonFiniteState(t + dt)
    return out


# ---------------------------------------------------------------------------
# scenario and trace

class ControllerKind(Enum):
    SMC = "smc"
    NISMC = "nismc"
    HNISMC = "hnismc"


@dataclass(frozen=True, eq=False)
class Scenario:
    """Complete, immutable description of one closed-loop run.

    params_controller is what every torque law believes; params_plant is what
    the integrator uses (defaults to the same object, set it to model
    parameter mismatch).  All three gain sets ride along so one Scenario can
    drive a controller comparison; ``controller`` picks the active law.
    """

    params_controller: RobotParams = field(default_factory=RobotParams)
    params_plant: RobotParams | None = None
    controller: ControllerKind = ControllerKind.HNISMC
    smc_gains: SmcGains = field(default_factory=SmcGains)
    nismc_gains: NismcGains = field(default_factory=NismcGains)
    hybrid_gains: HybridGains = field(default_factory=HybridGains)
    reference: ReferenceSpec = field(default_factory=ReferenceSpec)
    disturbance: DisturbanceModel = field(default_factory=DisturbanceModel.viscous_coulomb)
    switch: SwitchConfig = field(default_factory=SwitchConfig)
    coriolis_mode: CoriolisMode = CoriolisMode.TABULATED
    initial: JointState = field(default_factory=lambda: JointState(np.zeros(2), np.zeros(2)))
    t_end: float = 10.0
    dt_plant: float = 1e-4
    dt_control: float = 1.25e-3
    filter: FilterParams | None = None

    def __post_init__(self):
        if self.params_plant is None:
            object.__setattr__(self, "params_plant", self.params_controller)
        if not (math.isfinite(self.dt_plant) and self.dt_plant > 0):
            raise ValueError(f"dt_plant must be > 0, got {self.dt_plant!r}")
        if not (math.isfinite(self.dt_control) and self.dt_control >= self.dt_plant):
            raise ValueError(
                f"dt_control must be >= dt_plant, got {self.dt_control!r}")
        if not (math.isfinite(self.t_end) and self.t_end >= 0):
            raise ValueError(f"t_end must be >= 0, got {self.t_end!r}")
        if self.filter is not None and self.filter.sample_dt < self.dt_plant:
            raise ValueError("filter sample_dt must be >= dt_plant")


def _fingerprint_value(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, Enum):
        return v.value
    if hasattr(v, "__dataclass_fields__"):
        return {f.name: _fingerprint_value(getattr(v, f.name))
                for f in fields(v)}
    return v


def scenario_fingerprint(sc: Scenario) -> str:
    """Stable 12-hex-digit digest of every field of the scenario."""
    canon = repr(_fingerprint_value(sc))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


@dataclass(frozen=True, eq=False)
class Trace:
    """Row-per-plant-step record of a run.

    Vector columns have shape (n, 2); t and L have shape (n,).  sigma is the
    active controller's surface value (integral state held between controller
    updates) and L = 0.5 sigma' sigma.  tick_rows/tick_times give the rows at
    or just after each controller update; analysis code falls back to "every
    row" when they are absent (hand-built traces).
    """

    t: np.ndarray
    q: np.ndarray
    qdot: np.ndarray
    q_ref: np.ndarray
    qdot_ref: np.ndarray
    e: np.ndarray
    edot: np.ndarray
    sigma: np.ndarray
    tau: np.ndarray
    d: np.ndarray
    L: np.ndarray
    tick_rows: np.ndarray | None = None
    tick_times: np.ndarray | None = None
    controller: str = ""
    scenario_hash: str = ""
    coriolis_mode: str = ""
    gains: str = ""
    scenario: Scenario | None = None

    def __len__(self):
        return self.t.shape[0]


def _row_count(t_end: float, dt: float) -> int:
    ratio = t_end / dt
    return int(math.floor(ratio + 1e-9 * max(1.0, ratio))) + 1


def _make_plant_rhs(plant: RobotParams, dist_fn, mode: CoriolisMode):
    a = plant.m2 * plant.l1 * plant.l2
    mc = plant.m2 * plant.l2 * plant.l2
    mbase = (plant.m1 + plant.m2) * plant.l1 * plant.l1 + mc
    ga = (plant.m1 + plant.m2) * plant.gravity * plant.l1
    gb = plant.m2 * plant.gravity * plant.l2
    christoffel = mode is CoriolisMode.CHRISTOFFEL
    sin = math.sin
    cos = math.cos
    limit = RCOND_LIMIT

    def rhs(t, q1, q2, w1, w2, u1, u2):
        s2 = sin(q2)
        cth = cos(q2)
        m11 = mbase + 2.0 * a * cth
        m12 = mc + a * cth
        h = a * s2
        n1 = -h * (2.0 * w1 * w2 + w2 * w2)
        n2 = h * w1 * w1 if christoffel else -h * w1 * w2
        s12 = sin(q1 + q2)
        g1 = -ga * sin(q1) - gb * s12
        g2 = -gb * s12
        det = m11 * mc - m12 * m12
        tr = m11 + mc
        if not det > limit * tr * tr:
            raise SingularMass(
                "mass matrix numerically singular during integration")
        b1 = u1 - n1 - g1
        b2 = u2 - n2 - g2
        d1, d2 = dist_fn(t, q1, q2, w1, w2)
        return w1, w2, (mc * b1 - m12 * b2) / det + d1, \
            (m11 * b2 - m12 * b1) / det + d2

    return rhs


def _rk4_scalar(rhs, t, h, q1, q2, w1, w2, u1, u2):
    a1, b1, c1, d1 = rhs(t, q1, q2, w1, w2, u1, u2)
    hh = 0.5 * h
    a2, b2, c2, d2 = rhs(t + hh, q1 + hh * a1, q2 + hh * b1,
                         w1 + hh * c1, w2 + hh * d1, u1, u2)
    a3, b3, c3, d3 = rhs(t + hh, q1 + hh * a2, q2 + hh * b2,
                         w1 + hh * c2, w2 + hh * d2, u1, u2)
    a4, b4, c4, d4 = rhs(t + h, q1 + h * a3, q2 + h * b3,
                         w1 + h * c3, w2 + h * d3, u1, u2)
    s = h / 6.0
    return (q1 + s * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
            q2 + s * (b1 + 2.0 * b2 + 2.0 * b3 + b4),
            w1 + s * (c1 + 2.0 * c2 + 2.0 * c3 + c4),
            w2 + s * (d1 + 2.0 * d2 + 2.0 * d3 + d4))


def _gain_summary(sc: Scenario) -> str:
    k = sc.controller
    if k is ControllerKind.SMC:
        g = sc.smc_gains
        return f"lam={g.lam.tolist()} gamma={g.gamma.tolist()}"
    if k is ControllerKind.NISMC:
        g = sc.nismc_gains
        return (f"alpha={g.alpha.tolist()} beta={g.beta.tolist()} "
                f"gamma={g.gamma.tolist()}")
    g = sc.hybrid_gains
    return (f"alpha={g.base.alpha.tolist()} beta={g.base.beta.tolist()} "
            f"gamma={g.base.gamma.tolist()} xi1={g.xi1.tolist()} "
            f"xi2={g.xi2.tolist()}")


def run_simulation(sc: Scenario) -> Trace:
    """Integrate one scenario and return its Trace.

    Single-threaded and allocation-free in the hot loop.  Raises
    NonFiniteState (with the partial trace attached) if the state or the
    commanded torque diverges.
    """
    kind = sc.controller
    if kind is ControllerKind.HNISMC:
        for msg in validate_gains(sc.hybrid_gains):
            log.warning("%s", msg)

    n_rows = _row_count(sc.t_end, sc.dt_plant)
    n_steps = n_rows - 1
    dtp = sc.dt_plant
    dtc = sc.dt_control
    tol = 1e-9 * dtp

    dist_fn = _make_disturbance_fn(sc.disturbance, sc.params_plant)
    rhs = _make_plant_rhs(sc.params_plant, dist_fn, sc.coriolis_mode)

    nom = sc.params_controller
    sw = sc.switch
    ref_spec = sc.reference
    mode = sc.coriolis_mode
    smc_g = sc.smc_gains
    if kind is ControllerKind.SMC:
        lam1, lam2 = float(smc_g.lam[0]), float(smc_g.lam[1])
        integral_g = None
    else:
        integral_g = sc.nismc_gains if kind is ControllerKind.NISMC \
            else sc.hybrid_gains.base

    # column storage
    col_t = np.empty(n_rows)
    col_q1 = np.empty(n_rows)
    col_q2 = np.empty(n_rows)
    col_w1 = np.empty(n_rows)
    col_w2 = np.empty(n_rows)
    col_qr1 = np.empty(n_rows)
    col_qr2 = np.empty(n_rows)
    col_wr1 = np.empty(n_rows)
    col_wr2 = np.empty(n_rows)
    col_e1 = np.empty(n_rows)
    col_e2 = np.empty(n_rows)
    col_de1 = np.empty(n_rows)
    col_de2 = np.empty(n_rows)
    col_s1 = np.empty(n_rows)
    col_s2 = np.empty(n_rows)
    col_u1 = np.empty(n_rows)
    col_u2 = np.empty(n_rows)
    col_d1 = np.empty(n_rows)
    col_d2 = np.empty(n_rows)
    col_L = np.empty(n_rows)

    q1 = float(sc.initial.q[0])
    q2 = float(sc.initial.q[1])
    w1 = float(sc.initial.qdot[0])
    w2 = float(sc.initial.qdot[1])
    u1 = u2 = 0.0
    integ = IntegralState()
    tick_rows: list[int] = []
    tick_times: list[float] = []
    j = 0  # index of the next controller update

    fp = sc.filter
    use_fpos = fp is not None and fp.on_position
    use_fvel = fp is not None and fp.on_velocity
    if fp is not None:
        mf = max(1, int(round(fp.sample_dt / dtp)))
        fstate = filter_init(np.array([q1, q2, w1, w2]))
        fout = fstate[0].copy()
    else:
        mf = 0

    def assemble(rows: int) -> Trace:
        return Trace(
            t=col_t[:rows].copy(),
            q=np.column_stack([col_q1[:rows], col_q2[:rows]]),
            qdot=np.column_stack([col_w1[:rows], col_w2[:rows]]),
            q_ref=np.column_stack([col_qr1[:rows], col_qr2[:rows]]),
            qdot_ref=np.column_stack([col_wr1[:rows], col_wr2[:rows]]),
            e=np.column_stack([col_e1[:rows], col_e2[:rows]]),
            edot=np.column_stack([col_de1[:rows], col_de2[:rows]]),
            sigma=np.column_stack([col_s1[:rows], col_s2[:rows]]),
            tau=np.column_stack([col_u1[:rows], col_u2[:rows]]),
            d=np.column_stack([col_d1[:rows], col_d2[:rows]]),
            L=col_L[:rows].copy(),
            tick_rows=np.array([r for r in tick_rows if r < rows], dtype=int),
            tick_times=np.array(tick_times[:sum(1 for r in tick_rows if r < rows)]),
            controller=kind.value,
            scenario_hash=scenario_fingerprint(sc),
            coriolis_mode=mode.value,
            gains=_gain_summary(sc),
            scenario=sc,
        )

    def controller_update(t_now: float, row: int):
        nonlocal u1, u2, integ
        if use_fpos:
            mq = np.array([fout[0], fout[1]])
        else:
            mq = np.array([q1, q2])
        if use_fvel:
            mw = np.array([fout[2], fout[3]])
        else:
            mw = np.array([w1, w2])
        ref = reference(ref_spec, t_now)
        st = JointState(mq, mw)
        err = TrackingError(ref[0] - mq, ref[1] - mw)
        if kind is ControllerKind.SMC:
            tau = smc_control(nom, st, ref, smc_g, sw, mode)
        else:
            dt_el = t_now - integ.t_last
            if dt_el > 0:
                integ = integral_update(integ, err, integral_g, dt_el)
            if kind is ControllerKind.NISMC:
                tau = nismc_control(nom, st, ref, integ, err, sc.nismc_gains,
                                    sw, mode)
            else:
                tau = hnismc_control(nom, st, ref, integ, err, sc.hybrid_gains,
                                     sw, mode)
        u1 = float(tau[0])
        u2 = float(tau[1])
        if not (math.isfinite(u1) and math.isfinite(u2)):
            raise NonFiniteState(t_now, assemble(row))
        tick_rows.append(row)
        tick_times.append(t_now)

    for k in range(n_rows):
        t_row = k * dtp

        if mf and k % mf == 0 and k > 0:
            fstate, fout = filter_step(fstate, np.array([q1, q2, w1, w2]), fp)

        if j * dtc <= t_row + tol:
            # pass the controller's own clock so tick times do not depend on
            # the plant grid
            controller_update(j * dtc, k)
            j += 1

        # record row k
        qr, wr, _ = reference(ref_spec, t_row)
        e1 = qr[0] - q1
        e2 = qr[1] - q2
        de1 = wr[0] - w1
        de2 = wr[1] - w2
        if kind is ControllerKind.SMC:
            s1 = de1 + lam1 * e1
            s2 = de2 + lam2 * e2
        else:
            s1 = de1 + integ.z[0]
            s2 = de2 + integ.z[1]
        d1, d2 = dist_fn(t_row, q1, q2, w1, w2)
        col_t[k] = t_row
        col_q1[k] = q1
        col_q2[k] = q2
        col_w1[k] = w1
        col_w2[k] = w2
        col_qr1[k] = qr[0]
        col_qr2[k] = qr[1]
        col_wr1[k] = wr[0]
        col_wr2[k] = wr[1]
        col_e1[k] = e1
        col_e2[k] = e2
        col_de1[k] = de1
        col_de2[k] = de2
        col_s1[k] = s1
        col_s2[k] = s2
        col_u1[k] = u1
        col_u2[k] = u2
        col_d1[k] = d1
        col_d2[k] = d2
        col_L[k] = 0.5 * (s1 * s1 + s2 * s2)

        if k == n_steps:
            break

        # integrate to the next row, splitting at an interior controller update
        t_next = (k + 1) * dtp
        t_tick = j * dtc
        try:
            if t_tick < t_next - tol:
                h1 = t_tick - t_row
                q1, q2, w1, w2 = _rk4_scalar(rhs, t_row, h1, q1, q2, w1, w2, u1, u2)
                if not (math.isfinite(q1) and math.isfinite(q2)
                        and math.isfinite(w1) and math.isfinite(w2)):
                    raise NonFiniteState(t_tick, assemble(k + 1))
                controller_update(t_tick, k + 1)
                j += 1
                q1, q2, w1, w2 = _rk4_scalar(rhs, t_tick, t_next - t_tick,
                                             q1, q2, w1, w2, u1, u2)
            else:
                q1, q2, w1, w2 = _rk4_scalar(rhs, t_row, dtp, q1, q2, w1, w2, u1, u2)
        except (SingularMass, OverflowError, ValueError) as exc:
            # a blown-up state can hit the inertia guard or a math range
            # error inside an RK4 stage before the finiteness check sees it
            raise NonFiniteState(t_next, assemble(k + 1)) from exc
        if not (math.isfinite(q1) and math.isfinite(q2)
                and math.isfinite(w1) and math.isfinite(w2)):
            raise NonFiniteState(t_next, assemble(k + 1))

    return assemble(n_rows)
