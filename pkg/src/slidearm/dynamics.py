"""Rigid-body model of a two-link planar arm.

The arm is a pair of point-mass links moving in a vertical plane.  Its motion
obeys

    M(q) qddot + N(q, qdot) + G(q) = tau

where ``M`` is the symmetric positive-definite inertia matrix, ``N`` collects
the centrifugal and Coriolis forces as a vector, and ``G`` is the gravity
torque.  All quantities are SI: angles in rad, rates in rad/s, masses in kg,
lengths in m, torques in N*m.

Two conventions for ``N`` are supported, see :class:`CoriolisMode`.  The
closed forms are exact, so every function here is cheap and allocation-light;
the heavy simulation loop uses the same scalar kernels through the private
helpers.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "CoriolisMode",
    "JointState",
    "RobotParams",
    "SingularMass",
    "RCOND_LIMIT",
    "coriolis_matrix",
    "coriolis_vector",
    "energy",
    "forward_dynamics",
    "gravity_vector",
    "inverse_dynamics",
    "mass_matrix",
]

# Reciprocal-condition threshold below which the inertia matrix is treated as
# numerically singular.  Valid parameter sets never get close; hitting it
# signals non-physical inputs.
RCOND_LIMIT = 1e-12


class SingularMass(ValueError):
    """Inertia matrix is numerically singular at the requested configuration."""


class CoriolisMode(Enum):
    """Selects which velocity-product force vector the model evaluates.

    TABULATED is the closed-form vector this rig's model is usually written
    with.  Its second row is not what the Christoffel construction yields, so
    it does not satisfy the skew-symmetry property exactly.  CHRISTOFFEL
    derives the vector from the inertia matrix; use it whenever energy
    bookkeeping matters (passivity, conservation oracles).
    """

    TABULATED = "tabulated"
    CHRISTOFFEL = "christoffel"


@dataclass(frozen=True)
class RobotParams:
    """Physical constants of the arm.  Defaults are the benchmark rig values.

    m1, m2: link masses (kg), modeled as point masses at the link tips.
    l1, l2: link lengths (m).
    gravity: gravitational acceleration (m/s^2).
    """

    m1: float = 0.386
    m2: float = 0.722
    l1: float = 0.32
    l2: float = 0.36
    gravity: float = 9.81

    def __post_init__(self):
        for name in ("m1", "m2", "l1", "l2"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite number, got {v!r}")
        g = self.gravity
        if not (isinstance(g, (int, float)) and math.isfinite(g) and g >= 0):
            raise ValueError(f"gravity must be finite and non-negative, got {g!r}")

    def scaled(self, factor: float) -> "RobotParams":
        """Masses and lengths multiplied by ``factor`` (model-mismatch studies)."""
        return RobotParams(
            m1=self.m1 * factor,
            m2=self.m2 * factor,
            l1=self.l1 * factor,
            l2=self.l2 * factor,
            gravity=self.gravity,
        )


def _vec2(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.shape == ():
        arr = np.array([float(arr), float(arr)])
    if arr.shape != (2,):
        raise ValueError(f"{name} must have shape (2,), got {arr.shape}")
    return arr


def _finite_vec2(x, name: str) -> np.ndarray:
    arr = _vec2(x, name)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {arr}")
    return arr


@dataclass(frozen=True, eq=False)
class JointState:
    """Joint angles ``q`` (rad) and rates ``qdot`` (rad/s), both shape (2,)."""

    q: np.ndarray
    qdot: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", _finite_vec2(self.q, "q"))
        object.__setattr__(self, "qdot", _finite_vec2(self.qdot, "qdot"))


# Scalar kernels.  The simulation hot loop calls these shapes of arithmetic
# directly; the array API below wraps them.

def _mass_terms(p: RobotParams, cos_q2: float):
    a = p.m2 * p.l1 * p.l2
    m22 = p.m2 * p.l2 * p.l2
    m12 = m22 + a * cos_q2
    m11 = (p.m1 + p.m2) * p.l1 * p.l1 + m22 + 2.0 * a * cos_q2
    return m11, m12, m22


def _coriolis_terms(p: RobotParams, sin_q2: float, w1: float, w2: float,
                    christoffel: bool):
    h = p.m2 * p.l1 * p.l2 * sin_q2
    n1 = -h * (2.0 * w1 * w2 + w2 * w2)
    n2 = h * w1 * w1 if christoffel else -h * w1 * w2
    return n1, n2


def _gravity_terms(p: RobotParams, q1: float, q2: float):
    g1 = -(p.m1 + p.m2) * p.gravity * p.l1 * math.sin(q1) \
        - p.m2 * p.gravity * p.l2 * math.sin(q1 + q2)
    g2 = -p.m2 * p.gravity * p.l2 * math.sin(q1 + q2)
    return g1, g2


def _rcond_sym2(m11: float, m12: float, m22: float) -> float:
    # Exact eigenvalue ratio for a symmetric 2x2 matrix.
    tr = m11 + m22
    det = m11 * m22 - m12 * m12
    disc = math.sqrt(max(tr * tr - 4.0 * det, 0.0))
    lmax = 0.5 * (abs(tr) + disc)
    if lmax == 0.0:
        return 0.0
    lmin = abs(det) / lmax
    return lmin / lmax


def _solve_sym2(m11, m12, m22, b1, b2):
    if _rcond_sym2(m11, m12, m22) < RCOND_LIMIT:
        raise SingularMass(
            f"mass matrix reciprocal condition below {RCOND_LIMIT:g}; "
            "check the robot parameters"
        )
    det = m11 * m22 - m12 * m12
    return (m22 * b1 - m12 * b2) / det, (m11 * b2 - m12 * b1) / det


def mass_matrix(p: RobotParams, q) -> np.ndarray:
    """Inertia matrix M(q), shape (2, 2), symmetric positive definite.

    Only the relative angle q[1] enters; the (1,1) entry is constant.
    """
    q = _vec2(q, "q")
    m11, m12, m22 = _mass_terms(p, math.cos(q[1]))
    return np.array([[m11, m12], [m12, m22]])


def coriolis_vector(p: RobotParams, s: JointState,
                    mode: CoriolisMode = CoriolisMode.TABULATED) -> np.ndarray:
    """Centrifugal/Coriolis force vector N(q, qdot), shape (2,).

    Quadratic in the joint rates, zero whenever qdot = 0 or sin(q[1]) = 0.
    The two modes differ only in the second component.
    """
    n1, n2 = _coriolis_terms(p, math.sin(s.q[1]), s.qdot[0], s.qdot[1],
                             mode is CoriolisMode.CHRISTOFFEL)
    return np.array([n1, n2])


def coriolis_matrix(p: RobotParams, s: JointState) -> np.ndarray:
    """Christoffel matrix C(q, qdot) with C @ qdot == the CHRISTOFFEL vector.

    Built so that Mdot - 2C is skew-symmetric along any trajectory, which is
    what the energy-conservation oracles rely on.
    """
    h = p.m2 * p.l1 * p.l2 * math.sin(s.q[1])
    w1, w2 = s.qdot
    return np.array([[-h * w2, -h * (w1 + w2)], [h * w1, 0.0]])


def gravity_vector(p: RobotParams, q) -> np.ndarray:
    """Gravity torque G(q), shape (2,).  Angles are measured from the upright."""
    q = _vec2(q, "q")
    g1, g2 = _gravity_terms(p, q[0], q[1])
    return np.array([g1, g2])


def forward_dynamics(p: RobotParams, s: JointState, tau, d=None,
                     mode: CoriolisMode = CoriolisMode.TABULATED) -> np.ndarray:
    """Joint accelerations for applied torque ``tau`` and lumped disturbance ``d``.

    qddot = M(q)^-1 (tau - N - G) + d.  The disturbance enters at acceleration
    level, after the inertia solve.  Raises SingularMass when the inertia
    matrix cannot be inverted reliably.
    """
    tau = _vec2(tau, "tau")
    m11, m12, m22 = _mass_terms(p, math.cos(s.q[1]))
    n1, n2 = _coriolis_terms(p, math.sin(s.q[1]), s.qdot[0], s.qdot[1],
                             mode is CoriolisMode.CHRISTOFFEL)
    g1, g2 = _gravity_terms(p, s.q[0], s.q[1])
    a1, a2 = _solve_sym2(m11, m12, m22, tau[0] - n1 - g1, tau[1] - n2 - g2)
    if d is None:
        return np.array([a1, a2])
    d = _vec2(d, "d")
    return np.array([a1 + d[0], a2 + d[1]])


def inverse_dynamics(p: RobotParams, s: JointState, qddot,
                     mode: CoriolisMode = CoriolisMode.TABULATED) -> np.ndarray:
    """Torque that produces ``qddot`` at state ``s`` (no disturbance): M qddot + N + G."""
    qddot = _vec2(qddot, "qddot")
    m11, m12, m22 = _mass_terms(p, math.cos(s.q[1]))
    n1, n2 = _coriolis_terms(p, math.sin(s.q[1]), s.qdot[0], s.qdot[1],
                             mode is CoriolisMode.CHRISTOFFEL)
    g1, g2 = _gravity_terms(p, s.q[0], s.q[1])
    return np.array([
        m11 * qddot[0] + m12 * qddot[1] + n1 + g1,
        m12 * qddot[0] + m22 * qddot[1] + n2 + g2,
    ])


def energy(p: RobotParams, s: JointState) -> tuple[float, float]:
    """(kinetic, potential) energy in J.

    Kinetic is 0.5 qdot' M qdot.  The potential is the height term whose
    gradient reproduces :func:`gravity_vector`, so kinetic + potential is
    conserved in free fall under the CHRISTOFFEL mode.
    """
    m11, m12, m22 = _mass_terms(p, math.cos(s.q[1]))
    w1, w2 = s.qdot
    kinetic = 0.5 * (m11 * w1 * w1 + 2.0 * m12 * w1 * w2 + m22 * w2 * w2)
    potential = (p.m1 + p.m2) * p.gravity * p.l1 * math.cos(s.q[0]) \
        + p.m2 * p.gravity * p.l2 * math.cos(s.q[0] + s.q[1])
    return kinetic, potential
