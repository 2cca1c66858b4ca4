"""Analytic planar dynamics of a variable-length wheeled inverted pendulum.

One wheel rolls on the ground; a point-mass body rides on an actuated
prismatic joint anchored at the wheel center.  Generalized coordinates:

    q = [x, z, phi, l, theta]

x, z are the wheel-center position, phi the wheel spin angle, l the joint
length from wheel center to body mass, theta the body tilt measured from the
inertial z-axis (0 is upright, positive tilts toward +x).  The sign of phi is
chosen so that rolling forward satisfies xd = R_w * phid.  Units are SI.

All functions are pure; the dataclasses are immutable after construction and
safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SingularMass(RuntimeError):
    """Mass matrix too ill-conditioned to invert (degenerate geometry)."""


def _as_vec(value, n: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.shape != (n,):
        raise ValueError(f"{name} must have shape ({n},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {arr}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class RobotModel:
    """Physical parameters of the robot (SI units)."""

    body_mass: float = 4.5      # kg, point mass at the end of the joint
    wheel_mass: float = 1.5     # kg, all wheel pairs lumped into one wheel
    wheel_radius: float = 0.17  # m
    gravity: float = 9.81       # m/s^2, acts along -z
    friction: float = 0.8       # Coulomb coefficient at the ground contact
    length_min: float = 0.2     # m, prismatic joint travel bounds
    length_max: float = 0.8     # m
    torque_limit: float = 10.0  # N*m, wheel torque magnitude bound
    force_limit: float = 200.0  # N, prismatic force magnitude bound

    def __post_init__(self) -> None:
        for name in ("body_mass", "wheel_mass", "wheel_radius", "gravity", "friction"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.length_min < self.length_max:
            raise ValueError("need 0 < length_min < length_max")
        if self.torque_limit <= 0.0 or self.force_limit <= 0.0:
            raise ValueError("actuation limits must be positive")

    @property
    def total_mass(self) -> float:
        return self.body_mass + self.wheel_mass

    @property
    def wheel_inertia(self) -> float:
        # point-mass rim approximation, I_w = m_w * R_w^2
        return self.wheel_mass * self.wheel_radius**2


@dataclass(frozen=True)
class State:
    """Generalized position q and velocity qd (5 components each)."""

    q: np.ndarray
    qd: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "q", _as_vec(self.q, 5, "q"))
        object.__setattr__(self, "qd", _as_vec(self.qd, 5, "qd"))

    @staticmethod
    def from_vector(vec) -> "State":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (10,):
            raise ValueError(f"state vector must have shape (10,), got {vec.shape}")
        return State(vec[:5].copy(), vec[5:].copy())

    def vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.qd])

    @property
    def x(self) -> float:
        return float(self.q[0])

    @property
    def z(self) -> float:
        return float(self.q[1])

    @property
    def phi(self) -> float:
        return float(self.q[2])

    @property
    def length(self) -> float:
        return float(self.q[3])

    @property
    def theta(self) -> float:
        return float(self.q[4])

    @property
    def xd(self) -> float:
        return float(self.qd[0])

    @property
    def zd(self) -> float:
        return float(self.qd[1])

    @property
    def phid(self) -> float:
        return float(self.qd[2])

    @property
    def lengthd(self) -> float:
        return float(self.qd[3])

    @property
    def thetad(self) -> float:
        return float(self.qd[4])


@dataclass(frozen=True)
class Control:
    """Wheel torque tau [N*m] and prismatic force f [N]."""

    tau: float
    f: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.tau) and np.isfinite(self.f)):
            raise ValueError("control entries must be finite")

    def vector(self) -> np.ndarray:
        return np.array([self.tau, self.f])


@dataclass(frozen=True)
class ContactForce:
    """Ground reaction force on the wheel, world components [N]."""

    fx: float
    fz: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.fx) and np.isfinite(self.fz)):
            raise ValueError("contact force entries must be finite")

    def vector(self) -> np.ndarray:
        return np.array([self.fx, self.fz])


ZERO_CONTACT = ContactForce(0.0, 0.0)


def mass_matrix(model: RobotModel, q) -> np.ndarray:
    """Inertia matrix M(q), symmetric 5x5."""
    q = np.asarray(q, dtype=float)
    mb = model.body_mass
    s, c = np.sin(q[4]), np.cos(q[4])
    l = q[3]
    mt = model.total_mass
    return np.array(
        [
            [mt, 0.0, 0.0, mb * s, mb * l * c],
            [0.0, mt, 0.0, mb * c, -mb * l * s],
            [0.0, 0.0, model.wheel_inertia, 0.0, 0.0],
            [mb * s, mb * c, 0.0, mb, 0.0],
            [mb * l * c, -mb * l * s, 0.0, 0.0, mb * l * l],
        ]
    )


def coriolis_matrix(model: RobotModel, q, qd) -> np.ndarray:
    """Coriolis/centrifugal matrix C(q, qd); C @ qd gives the velocity terms."""
    q = np.asarray(q, dtype=float)
    qd = np.asarray(qd, dtype=float)
    mb = model.body_mass
    s, c = np.sin(q[4]), np.cos(q[4])
    l, td = q[3], qd[4]
    return np.array(
        [
            [0.0, 0.0, 0.0, 2.0 * mb * c * td, -mb * l * s * td],
            [0.0, 0.0, 0.0, -2.0 * mb * s * td, -mb * l * c * td],
            [0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, -mb * l * td],
            [0.0, 0.0, 0.0, 2.0 * mb * l * td, 0.0],
        ]
    )


def gravity_vector(model: RobotModel, q) -> np.ndarray:
    """Gravity generalized force G(q) = dU/dq."""
    q = np.asarray(q, dtype=float)
    mb, g = model.body_mass, model.gravity
    s, c = np.sin(q[4]), np.cos(q[4])
    return np.array([0.0, g * model.total_mass, 0.0, g * mb * c, -g * mb * q[3] * s])


def selection_matrix() -> np.ndarray:
    """Maps controls [tau, f] into generalized forces; -tau reacts on the body."""
    return np.array([[0.0, 0.0, 1.0, 0.0, -1.0], [0.0, 0.0, 0.0, 1.0, 0.0]])


def contact_jacobian(model: RobotModel) -> np.ndarray:
    """Contact-point velocity map: rdot_C = J_C @ qd (constant in q)."""
    return np.array([[1.0, 0.0, -model.wheel_radius, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0, 0.0]])


def forward_dynamics(
    model: RobotModel,
    state: State,
    u: Control,
    contact: ContactForce = ZERO_CONTACT,
    *,
    condition_limit: float = 1e12,
) -> np.ndarray:
    """Generalized acceleration qdd = M^-1 (S^T u + J_C^T lam - C qd - G).

    Also valid in flight with contact = 0.  Raises SingularMass when the
    1-norm condition estimate of M exceeds `condition_limit` (reachable only
    for degenerate parameters such as l near zero).
    """
    M = mass_matrix(model, state.q)
    try:
        Minv = np.linalg.inv(M)
    except np.linalg.LinAlgError as exc:
        raise SingularMass(f"mass matrix exactly singular at l={state.length}") from exc
    cond = np.linalg.norm(M, 1) * np.linalg.norm(Minv, 1)
    if not np.isfinite(cond) or cond > condition_limit:
        raise SingularMass(f"mass matrix condition estimate {cond:.3e} exceeds {condition_limit:.1e}")
    rhs = (
        selection_matrix().T @ u.vector()
        + contact_jacobian(model).T @ contact.vector()
        - _velocity_product(model, state.q, state.qd)
        - gravity_vector(model, state.q)
    )
    return Minv @ rhs


def _velocity_product(model: RobotModel, q, qd) -> np.ndarray:
    """C(q, qd) @ qd evaluated directly (cheaper than forming C)."""
    mb = model.body_mass
    s, c = np.sin(q[4]), np.cos(q[4])
    l, ld, td = q[3], qd[3], qd[4]
    return np.array(
        [
            2.0 * mb * c * ld * td - mb * l * s * td * td,
            -2.0 * mb * s * ld * td - mb * l * c * td * td,
            0.0,
            -mb * l * td * td,
            2.0 * mb * l * ld * td,
        ]
    )


def body_position(state: State) -> tuple[float, float]:
    """Cartesian position of the point-mass body."""
    s, c = np.sin(state.theta), np.cos(state.theta)
    return state.x + state.length * s, state.z + state.length * c


def body_velocity(state: State) -> tuple[float, float]:
    """Cartesian velocity of the point-mass body."""
    s, c = np.sin(state.theta), np.cos(state.theta)
    l, ld, td = state.length, state.lengthd, state.thetad
    return (
        state.xd + ld * s + l * c * td,
        state.zd + ld * c - l * s * td,
    )


def energies(model: RobotModel, state: State) -> tuple[float, float]:
    """Kinetic and potential energy (T, U) in joules."""
    vbx, vbz = body_velocity(state)
    T = 0.5 * (
        model.wheel_inertia * state.phid**2
        + model.wheel_mass * (state.xd**2 + state.zd**2)
        + model.body_mass * (vbx**2 + vbz**2)
    )
    _, zb = body_position(state)
    U = model.wheel_mass * model.gravity * state.z + model.body_mass * model.gravity * zb
    return T, U


def com_position(model: RobotModel, state: State) -> tuple[float, float]:
    """Center of mass of wheel plus body."""
    xb, zb = body_position(state)
    mt = model.total_mass
    return (
        (model.wheel_mass * state.x + model.body_mass * xb) / mt,
        (model.wheel_mass * state.z + model.body_mass * zb) / mt,
    )


# ---------------------------------------------------------------------------
# Batched terms for the transcription layer.
#
# All arrays are stacked over a leading knot axis.  Only columns l and theta
# of q (indices 3, 4) and ld, thetad of qd enter M, C and G, so the partials
# are returned as (n, 5, 2) blocks for those column pairs.


def batch_accelerations(model: RobotModel, Q, Qd, U, Lam, with_partials: bool = True):
    """Accelerations (and optionally partials) for n knots at once.

    Q, Qd: (n, 5); U, Lam: (n, 2).  Returns a dict with
      acc        (n, 5)
      dacc_dq    (n, 5, 2)   columns for q[3] (l) and q[4] (theta)
      dacc_dqd   (n, 5, 2)   columns for qd[3] and qd[4]
      dacc_du    (n, 5, 2)
      dacc_dlam  (n, 5, 2)
    """
    Q = np.asarray(Q, dtype=float)
    Qd = np.asarray(Qd, dtype=float)
    U = np.asarray(U, dtype=float)
    Lam = np.asarray(Lam, dtype=float)
    n = Q.shape[0]
    mb, g = model.body_mass, model.gravity
    mt, Iw, Rw = model.total_mass, model.wheel_inertia, model.wheel_radius

    l = Q[:, 3]
    s = np.sin(Q[:, 4])
    c = np.cos(Q[:, 4])
    ld = Qd[:, 3]
    td = Qd[:, 4]

    M = np.zeros((n, 5, 5))
    M[:, 0, 0] = mt
    M[:, 1, 1] = mt
    M[:, 2, 2] = Iw
    M[:, 0, 3] = M[:, 3, 0] = mb * s
    M[:, 0, 4] = M[:, 4, 0] = mb * l * c
    M[:, 1, 3] = M[:, 3, 1] = mb * c
    M[:, 1, 4] = M[:, 4, 1] = -mb * l * s
    M[:, 3, 3] = mb
    M[:, 4, 4] = mb * l * l

    h = np.zeros((n, 5))
    h[:, 0] = 2.0 * mb * c * ld * td - mb * l * s * td * td
    h[:, 1] = -2.0 * mb * s * ld * td - mb * l * c * td * td
    h[:, 3] = -mb * l * td * td
    h[:, 4] = 2.0 * mb * l * ld * td

    G = np.zeros((n, 5))
    G[:, 1] = g * mt
    G[:, 3] = g * mb * c
    G[:, 4] = -g * mb * l * s

    # generalized force: S^T u + J_C^T lam
    F = np.zeros((n, 5))
    F[:, 0] = Lam[:, 0]
    F[:, 1] = Lam[:, 1]
    F[:, 2] = U[:, 0] - Rw * Lam[:, 0]
    F[:, 3] = U[:, 1]
    F[:, 4] = -U[:, 0]

    rhs = F - h - G
    acc = np.linalg.solve(M, rhs[..., None])[..., 0]
    out = {"acc": acc}
    if not with_partials:
        return out

    # d(M)/dl @ acc and d(M)/dtheta @ acc, assembled entrywise
    dMl_acc = np.zeros((n, 5))
    dMl_acc[:, 0] = mb * c * acc[:, 4]
    dMl_acc[:, 1] = -mb * s * acc[:, 4]
    dMl_acc[:, 4] = mb * c * acc[:, 0] - mb * s * acc[:, 1] + 2.0 * mb * l * acc[:, 4]

    dMt_acc = np.zeros((n, 5))
    dMt_acc[:, 0] = mb * c * acc[:, 3] - mb * l * s * acc[:, 4]
    dMt_acc[:, 1] = -mb * s * acc[:, 3] - mb * l * c * acc[:, 4]
    dMt_acc[:, 3] = mb * c * acc[:, 0] - mb * s * acc[:, 1]
    dMt_acc[:, 4] = -mb * l * s * acc[:, 0] - mb * l * c * acc[:, 1]

    dh_dl = np.zeros((n, 5))
    dh_dl[:, 0] = -mb * s * td * td
    dh_dl[:, 1] = -mb * c * td * td
    dh_dl[:, 3] = -mb * td * td
    dh_dl[:, 4] = 2.0 * mb * ld * td

    dh_dt = np.zeros((n, 5))
    dh_dt[:, 0] = -2.0 * mb * s * ld * td - mb * l * c * td * td
    dh_dt[:, 1] = -2.0 * mb * c * ld * td + mb * l * s * td * td

    dG_dl = np.zeros((n, 5))
    dG_dl[:, 4] = -g * mb * s

    dG_dt = np.zeros((n, 5))
    dG_dt[:, 3] = -g * mb * s
    dG_dt[:, 4] = -g * mb * l * c

    dh_dld = np.zeros((n, 5))
    dh_dld[:, 0] = 2.0 * mb * c * td
    dh_dld[:, 1] = -2.0 * mb * s * td
    dh_dld[:, 4] = 2.0 * mb * l * td

    dh_dtd = np.zeros((n, 5))
    dh_dtd[:, 0] = 2.0 * mb * c * ld - 2.0 * mb * l * s * td
    dh_dtd[:, 1] = -2.0 * mb * s * ld - 2.0 * mb * l * c * td
    dh_dtd[:, 3] = -2.0 * mb * l * td
    dh_dtd[:, 4] = 2.0 * mb * l * ld

    # constant input maps: S^T columns and J_C^T columns
    ST = np.zeros((n, 5, 2))
    ST[:, 2, 0] = 1.0
    ST[:, 4, 0] = -1.0
    ST[:, 3, 1] = 1.0
    JT = np.zeros((n, 5, 2))
    JT[:, 0, 0] = 1.0
    JT[:, 2, 0] = -Rw
    JT[:, 1, 1] = 1.0

    big = np.concatenate(
        [
            np.stack([-dh_dl - dG_dl - dMl_acc, -dh_dt - dG_dt - dMt_acc], axis=2),
            np.stack([-dh_dld, -dh_dtd], axis=2),
            ST,
            JT,
        ],
        axis=2,
    )
    sol = np.linalg.solve(M, big)
    out["dacc_dq"] = sol[:, :, 0:2]
    out["dacc_dqd"] = sol[:, :, 2:4]
    out["dacc_du"] = sol[:, :, 4:6]
    out["dacc_dlam"] = sol[:, :, 6:8]
    return out
