"""Independent numerical oracles used by the test suite.

Everything here is built only from the energy functions of the system
(kinetic/potential from the body-point kinematics) plus finite differences,
so it shares no code path with the analytic dynamics it is used to check.
"""

from __future__ import annotations

import numpy as np


def kinetic_energy(model, q, qd) -> float:
    """T from first principles: wheel translation/rotation + body translation."""
    x, z, phi, l, theta = q
    xd, zd, phid, ld, thetad = qd
    vbx = xd + ld * np.sin(theta) + l * np.cos(theta) * thetad
    vbz = zd + ld * np.cos(theta) - l * np.sin(theta) * thetad
    Iw = model.wheel_mass * model.wheel_radius**2
    return 0.5 * (
        Iw * phid**2
        + model.wheel_mass * (xd**2 + zd**2)
        + model.body_mass * (vbx**2 + vbz**2)
    )


def potential_energy(model, q) -> float:
    x, z, phi, l, theta = q
    zb = z + l * np.cos(theta)
    return model.wheel_mass * model.gravity * z + model.body_mass * model.gravity * zb


def fd_mass_matrix(model, q, h: float = 0.5) -> np.ndarray:
    """M_ij = d^2 T / dqd_i dqd_j by central differences.

    T is exactly quadratic in qd, so a large step costs no truncation error
    and keeps round-off small.
    """
    M = np.zeros((5, 5))
    for i in range(5):
        for j in range(5):
            qd = np.zeros(5)

            def T(di, dj):
                v = qd.copy()
                v[i] += di
                v[j] += dj
                return kinetic_energy(model, q, v)

            M[i, j] = (T(h, h) - T(h, -h) - T(-h, h) + T(-h, -h)) / (4.0 * h * h)
    return M


def fd_gravity(model, q, h: float = 1e-6) -> np.ndarray:
    """G = dU/dq by central differences."""
    G = np.zeros(5)
    for i in range(5):
        qp, qm = np.array(q, dtype=float), np.array(q, dtype=float)
        qp[i] += h
        qm[i] -= h
        G[i] = (potential_energy(model, qp) - potential_energy(model, qm)) / (2.0 * h)
    return G


def _dT_dqd(model, q, qd, i, h: float = 1e-3) -> float:
    qp, qm = np.array(qd, dtype=float), np.array(qd, dtype=float)
    qp[i] += h
    qm[i] -= h
    return (kinetic_energy(model, q, qp) - kinetic_energy(model, q, qm)) / (2.0 * h)


def lagrangian_acceleration(model, q, qd, u=(0.0, 0.0), lam=(0.0, 0.0)) -> np.ndarray:
    """Solve the Lagrange equations for qdd using only T, U and differences.

    d/dt dT/dqd_i - dT/dq_i + dU/dq_i = F_i  expands to
    M qdd = F + dT/dq - dU/dq - B qd   with   B_ij = d^2 T / dqd_i dq_j.
    """
    q = np.asarray(q, dtype=float)
    qd = np.asarray(qd, dtype=float)
    tau, f = u
    fx, fz = lam
    Rw = model.wheel_radius
    # generalized external force: wheel torque with body reaction, prismatic
    # force, and the contact force through the contact-point kinematics
    F = np.array([fx, fz, tau - Rw * fx, f, -tau])

    hq = 1e-6
    dT_dq = np.zeros(5)
    B = np.zeros((5, 5))
    for j in range(5):
        qp, qm = q.copy(), q.copy()
        qp[j] += hq
        qm[j] -= hq
        dT_dq[j] = (kinetic_energy(model, qp, qd) - kinetic_energy(model, qm, qd)) / (2.0 * hq)
        for i in range(5):
            B[i, j] = (_dT_dqd(model, qp, qd, i) - _dT_dqd(model, qm, qd, i)) / (2.0 * hq)

    M = fd_mass_matrix(model, q)
    rhs = F + dT_dq - fd_gravity(model, q) - B @ qd
    return np.linalg.solve(M, rhs)


def rk4_step(deriv, y, dt):
    k1 = deriv(y)
    k2 = deriv(y + 0.5 * dt * k1)
    k3 = deriv(y + 0.5 * dt * k2)
    k4 = deriv(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def random_state(rng, *, l_range=(0.25, 0.75), speed=2.0):
    """A generic finite random state with the joint inside its travel."""
    q = np.array(
        [
            rng.uniform(-1.0, 1.0),
            rng.uniform(0.1, 1.5),
            rng.uniform(-3.0, 3.0),
            rng.uniform(*l_range),
            rng.uniform(-1.4, 1.4),
        ]
    )
    qd = rng.uniform(-speed, speed, size=5)
    return q, qd
