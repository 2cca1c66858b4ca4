"""Builders for the standard planning tasks.

Each builder returns a (TaskSpec, PhaseSchedule) pair ready for
`build_nlp`.  Velocity boxes are deliberately generous; they exist to keep
the optimizer in the regime where the template dynamics are sensible, not to
shape the motion.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .dynamics import RobotModel, State
from .transcription import (
    Phase,
    PhaseKind,
    PhaseSchedule,
    TaskSpec,
    jump_phase_bounds,
)

FREE = np.inf

# default symmetric velocity bounds [xd, zd, phid, ld, thetad]
_VEL = np.array([5.0, 8.0, 60.0, 3.0, 8.0])


def upright_state(model: RobotModel, x: float = 0.0, length: float = 0.4) -> State:
    """Balanced rest state with the wheel on flat ground."""
    return State([x, model.wheel_radius, 0.0, length, 0.0], np.zeros(5))


def _goal(**pins) -> tuple:
    """Goal box from component pins; anything unnamed stays free."""
    lo = np.full(10, -FREE)
    hi = np.full(10, FREE)
    order = ["x", "z", "phi", "l", "theta", "xd", "zd", "phid", "ld", "thetad"]
    for name, value in pins.items():
        i = order.index(name)
        if np.iterable(value):
            lo[i], hi[i] = value
        else:
            lo[i] = hi[i] = value
    return lo, hi


def _ground_box(
    model: RobotModel,
    x_range: tuple,
    ground_z: float,
    theta_range: tuple,
    vel: np.ndarray = _VEL,
) -> tuple:
    lo = np.concatenate(
        [[x_range[0], ground_z, -FREE, model.length_min, theta_range[0]], -vel]
    )
    hi = np.concatenate(
        [[x_range[1], ground_z, FREE, model.length_max, theta_range[1]], vel]
    )
    return lo, hi


def static_task(
    model: RobotModel,
    length: float = 0.4,
    horizon: float = 1.0,
    intervals: int = 10,
) -> tuple:
    """Hold the upright rest pose; the static trajectory is the optimum."""
    start = upright_state(model, 0.0, length)
    goal = _goal(x=0.0, z=model.wheel_radius, phi=0.0, l=length, theta=0.0,
                 xd=0.0, zd=0.0, phid=0.0, ld=0.0, thetad=0.0)
    box = _ground_box(model, (-1.0, 1.0), model.wheel_radius, (-1.0, 1.0))
    task = TaskSpec(
        start_state=start,
        goal_lower=goal[0],
        goal_upper=goal[1],
        state_bounds_per_phase=(box,),
        control_bounds=(
            np.array([-model.torque_limit, -model.force_limit]),
            np.array([model.torque_limit, model.force_limit]),
        ),
    )
    schedule = PhaseSchedule(
        (Phase(PhaseKind.GROUND, intervals + 1, (horizon, horizon)),),
        (horizon, horizon),
    )
    return task, schedule


def drive_goal_state(model: RobotModel, distance: float = 1.0, length: float = 0.4,
                     start: Optional[State] = None) -> State:
    """Reference final state for the forward drive, spin consistent with rolling."""
    if start is None:
        start = upright_state(model, 0.0, length)
    phi_goal = start.phi + (distance - start.x) / model.wheel_radius
    return State(
        [distance, model.wheel_radius, phi_goal, length, 0.0], np.zeros(5)
    )


def drive_task(
    model: RobotModel,
    distance: float = 1.0,
    horizon: float = 3.0,
    intervals: int = 50,
    length: float = 0.4,
    start: Optional[State] = None,
    pin_spin: bool = True,
    free_horizon: bool = False,
) -> tuple:
    """Drive forward while balancing upright; full goal state pinned.

    `pin_spin=False` leaves the wheel angle free at the goal, which keeps
    replanning feasible when the executed motion has crept against the
    rolling constraint.
    """
    if start is None:
        start = upright_state(model, 0.0, length)
    ref = drive_goal_state(model, distance, length, start)
    pins = dict(x=ref.x, z=ref.z, l=length, theta=0.0,
                xd=0.0, zd=0.0, phid=0.0, ld=0.0, thetad=0.0)
    if pin_spin:
        pins["phi"] = ref.phi
    goal = _goal(**pins)
    x_lo = min(start.x, distance) - 1.0
    x_hi = max(start.x, distance) + 1.0
    box = _ground_box(model, (x_lo, x_hi), model.wheel_radius, (-np.pi / 2, np.pi / 2))
    task = TaskSpec(
        start_state=start,
        goal_lower=goal[0],
        goal_upper=goal[1],
        state_bounds_per_phase=(box,),
        control_bounds=(
            np.array([-model.torque_limit, -model.force_limit]),
            np.array([model.torque_limit, model.force_limit]),
        ),
    )
    bounds = (0.05, horizon) if free_horizon else (horizon, horizon)
    schedule = PhaseSchedule(
        (Phase(PhaseKind.GROUND, intervals + 1, bounds),), bounds
    )
    return task, schedule


def swing_up_task(
    model: RobotModel,
    start: State,
    horizon: float = 5.0,
    intervals: int = 20,
) -> tuple:
    """From a lowered, possibly fast-moving pose to balanced upright.

    Position, wheel angle and joint length at the end are free; tilt and all
    rates must vanish.
    """
    goal = _goal(theta=0.0, xd=0.0, zd=0.0, phid=0.0, ld=0.0, thetad=0.0)
    vel = np.array([6.0, 8.0, 60.0, 3.0, 12.0])
    box = _ground_box(
        model,
        (start.x - 2.0, start.x + 6.0 * horizon),
        model.wheel_radius,
        (-1.75, 1.75),
        vel,
    )
    task = TaskSpec(
        start_state=start,
        goal_lower=goal[0],
        goal_upper=goal[1],
        state_bounds_per_phase=(box,),
        control_bounds=(
            np.array([-model.torque_limit, -model.force_limit]),
            np.array([model.torque_limit, model.force_limit]),
        ),
    )
    schedule = PhaseSchedule(
        (Phase(PhaseKind.GROUND, intervals + 1, (horizon, horizon)),),
        (horizon, horizon),
    )
    return task, schedule


def jump_task(
    model: RobotModel,
    gap: tuple = (1.0, 1.6),
    height_cap: float = 1.0,
    knots: tuple = (40, 20, 40),
    phase_duration_bounds: tuple = ((0.1, 4.5), (0.05, 2.0), (0.1, 4.5)),
    total_time_bounds: tuple = (0.3, 5.0),
    landing_margin: float = 0.5,
    length: float = 0.4,
    start: Optional[State] = None,
) -> tuple:
    """Three-phase gap jump with free phase durations inside a total window."""
    if start is None:
        start = upright_state(model, 0.0, length)
    boxes = jump_phase_bounds(
        gap, (model.length_min, model.length_max), height_cap, model.wheel_radius
    )
    goal = _goal(
        x=gap[1] + landing_margin,
        theta=0.0,
        xd=0.0, zd=0.0, phid=0.0, ld=0.0, thetad=0.0,
    )
    task = TaskSpec(
        start_state=start,
        goal_lower=goal[0],
        goal_upper=goal[1],
        state_bounds_per_phase=tuple(boxes),
        control_bounds=(
            np.array([-model.torque_limit, -model.force_limit]),
            np.array([model.torque_limit, model.force_limit]),
        ),
        gap=gap,
        jump_height_cap=height_cap,
    )
    kinds = (PhaseKind.GROUND, PhaseKind.FLIGHT, PhaseKind.GROUND)
    schedule = PhaseSchedule(
        tuple(
            Phase(kind, k, db)
            for kind, k, db in zip(kinds, knots, phase_duration_bounds)
        ),
        total_time_bounds,
    )
    return task, schedule


def velocity_task(
    model: RobotModel,
    start: State,
    target_speed: float = 1.0,
    horizon: float = 1.0,
    intervals: int = 20,
    ground_height: Optional[float] = None,
) -> tuple:
    """Rolling-horizon cruise task: reach a forward speed while upright.

    `ground_height` pins the contact height the planner assumes; defaults to
    the wheel radius (flat ground at zero height).
    """
    gh = model.wheel_radius if ground_height is None else ground_height
    goal = _goal(theta=0.0, xd=target_speed)
    box = _ground_box(
        model,
        (start.x - 2.0, start.x + 2.0 + abs(target_speed) * 4.0 * horizon),
        gh,
        (-1.3, 1.3),
    )
    task = TaskSpec(
        start_state=start,
        goal_lower=goal[0],
        goal_upper=goal[1],
        state_bounds_per_phase=(box,),
        control_bounds=(
            np.array([-model.torque_limit, -model.force_limit]),
            np.array([model.torque_limit, model.force_limit]),
        ),
    )
    schedule = PhaseSchedule(
        (Phase(PhaseKind.GROUND, intervals + 1, (horizon, horizon)),),
        (horizon, horizon),
    )
    return task, schedule
