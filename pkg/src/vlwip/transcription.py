"""Direct transcription of wheeled-pendulum motions into a sparse NLP.

A task (start state, goal, per-phase bounds) plus a phase schedule
(ground/flight segments with knot counts and duration windows) becomes a
nonlinear program over

    v = [x_0 .. x_N,  u_0 .. u_{N-1},  lam_0 .. lam_{N-1},  T_0 .. T_{P-1}]

with trapezoidal dynamics defects inside each phase, no-slip rows at ground
knots, friction-cone rows on ground contact forces and a window on the total
duration.  Start state, goal, state/control boxes, flight-phase zero forces
and the unilateral normal force are all expressed as variable boun, which
keeps the constraint set small for the bound-constrained inner solver.

Knots shared by two phases carry the intersection of both phases' state
boxes and are tagged with the kind of the phase on their left, so a
takeoff knot still rolls without slip while a touchdown knot is force-free.
All first derivatives are analytic; the sparsity pattern is fixed at build
time.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .dynamics import RobotModel, State, batch_accelerations

STATE_DIM = 10
_COMPONENTS = ["x", "z", "phi", "l", "theta", "xd", "zd", "phid", "ld", "thetad"]


class InfeasibleBounds(ValueError):
    """A lower bound exceeds the matching upper bound after merging."""


class BadSchedule(ValueError):
    """A flight phase touches the trajectory boundary."""


class InvalidGap(ValueError):
    """Gap interval is empty or reversed."""


class PhaseKind(enum.Enum):
    GROUND = "Ground"
    FLIGHT = "Flight"


@dataclass(frozen=True)
class Phase:
    """One contact mode segment: knot count and a window on its duration."""

    kind: PhaseKind
    knots: int
    duration_bounds: tuple

    def __post_init__(self) -> None:
        if self.knots < 2:
            raise ValueError("a phase needs at least 2 knots")
        lo, hi = self.duration_bounds
        if not (0.0 < lo <= hi and np.isfinite(hi)):
            raise ValueError(f"bad duration bounds {self.duration_bounds}")


@dataclass(frozen=True)
class PhaseSchedule:
    """Ordered phases plus a window on the total motion time.

    Flight segments may not touch the trajectory boundary except that a
    schedule produced by receding a partially flown jump may start airborne
    (`starts_airborne=True`); `build_nlp` enforces this.
    """

    phases: tuple
    total_time_bounds: tuple
    starts_airborne: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "phases", tuple(self.phases))
        if not self.phases:
            raise ValueError("schedule needs at least one phase")
        lo, hi = self.total_time_bounds
        if not (0.0 < lo <= hi and np.isfinite(hi)):
            raise ValueError(f"bad total time bounds {self.total_time_bounds}")
        if sum(p.duration_bounds[0] for p in self.phases) > hi + 1e-12:
            raise ValueError("phase duration minima exceed the total time window")

    @property
    def num_intervals(self) -> int:
        return sum(p.knots - 1 for p in self.phases)

    @property
    def num_phases(self) -> int:
        return len(self.phases)


@dataclass(frozen=True)
class TaskSpec:
    """Boundary conditions, boxes and cost weight for one planning problem.

    The goal is a per-component box on the final knot: equal bounds pin a
    component, infinite bounds leave it free.  `state_bounds_per_phase` has
    one (lower, upper) pair of 10-vectors per schedule phase.
    """

    start_state: State
    goal_lower: np.ndarray
    goal_upper: np.ndarray
    state_bounds_per_phase: tuple
    control_bounds: tuple
    energy_weight: float = 1e-3
    friction: Optional[float] = None
    gap: Optional[tuple] = None
    jump_height_cap: Optional[float] = None

    def __post_init__(self) -> None:
        gl = np.asarray(self.goal_lower, dtype=float)
        gu = np.asarray(self.goal_upper, dtype=float)
        if gl.shape != (STATE_DIM,) or gu.shape != (STATE_DIM,):
            raise ValueError("goal bounds must be 10-vectors")
        if np.any(gl > gu):
            raise InfeasibleBounds("goal lower bound exceeds upper bound")
        object.__setattr__(self, "goal_lower", gl)
        object.__setattr__(self, "goal_upper", gu)
        merged = []
        for i, (lo, hi) in enumerate(self.state_bounds_per_phase):
            lo = np.asarray(lo, dtype=float)
            hi = np.asarray(hi, dtype=float)
            if lo.shape != (STATE_DIM,) or hi.shape != (STATE_DIM,):
                raise ValueError("per-phase state bounds must be 10-vectors")
            if np.any(lo > hi):
                j = int(np.argmax(lo > hi))
                raise InfeasibleBounds(
                    f"phase {i} state bound on {_COMPONENTS[j]}: {lo[j]} > {hi[j]}"
                )
            merged.append((lo, hi))
        object.__setattr__(self, "state_bounds_per_phase", tuple(merged))
        clo = np.asarray(self.control_bounds[0], dtype=float)
        chi = np.asarray(self.control_bounds[1], dtype=float)
        if np.any(clo > chi):
            raise InfeasibleBounds("control lower bound exceeds upper bound")
        object.__setattr__(self, "control_bounds", (clo, chi))
        if self.energy_weight <= 0.0:
            raise ValueError("energy weight must be positive")

    def with_start(self, start: State) -> "TaskSpec":
        return replace(self, start_state=start)


@dataclass
class Trajectory:
    """Time-stamped rows of (state, control, contact force, phase tag).

    The interchange format between planner, MPC, simulator and CLI; `status`
    optionally carries a per-row solver status string for closed-loop logs.
    """

    t: np.ndarray
    states: np.ndarray
    controls: np.ndarray
    forces: np.ndarray
    phases: list
    status: Optional[list] = None

    def __post_init__(self) -> None:
        self.t = np.asarray(self.t, dtype=float)
        self.states = np.asarray(self.states, dtype=float).reshape(len(self.t), STATE_DIM)
        self.controls = np.asarray(self.controls, dtype=float).reshape(len(self.t), 2)
        self.forces = np.asarray(self.forces, dtype=float).reshape(len(self.t), 2)
        if len(self.phases) != len(self.t):
            raise ValueError("phase tags must match row count")
        if len(self.t) > 1 and np.any(np.diff(self.t) <= 0.0):
            raise ValueError("row times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.t)

    def state(self, i: int) -> State:
        return State.from_vector(self.states[i])

    def interpolated(self, times) -> tuple:
        """Linear interpolation of states/controls/forces at given times."""
        times = np.asarray(times, dtype=float)
        states = np.stack([np.interp(times, self.t, self.states[:, j]) for j in range(STATE_DIM)], axis=1)
        controls = np.stack([np.interp(times, self.t, self.controls[:, j]) for j in range(2)], axis=1)
        forces = np.stack([np.interp(times, self.t, self.forces[:, j]) for j in range(2)], axis=1)
        return states, controls, forces


def jump_phase_bounds(
    gap: tuple,
    joint_bounds: tuple,
    height_cap: float,
    wheel_radius: float,
    velocity_bounds: Optional[np.ndarray] = None,
) -> list:
    """Per-phase state boxes for a pre-takeoff / flight / post-touchdown jump.

    Pre-takeoff keeps the wheel behind the near gap edge with its center
    pinned at ground height; flight lets the wheel rise up to `height_cap`;
    post-touchdown starts past the far edge.  The body stays within its
    joint travel and +-pi/2 of tilt throughout.
    """
    g_near, g_far = gap
    if not g_near < g_far:
        raise InvalidGap(f"gap must satisfy near < far, got {gap}")
    l_lo, l_hi = joint_bounds
    if velocity_bounds is None:
        velocity_bounds = np.array([5.0, 8.0, 60.0, 3.0, 8.0])
    vel = np.asarray(velocity_bounds, dtype=float)
    half_pi = np.pi / 2

    def box(x_lo, x_hi, z_lo, z_hi):
        lo = np.concatenate([[x_lo, z_lo, -np.inf, l_lo, -half_pi], -vel])
        hi = np.concatenate([[x_hi, z_hi, np.inf, l_hi, half_pi], vel])
        return lo, hi

    rw = wheel_radius
    return [
        box(-np.inf, g_near, rw, rw),
        box(-np.inf, np.inf, rw, height_cap),
        box(g_far, np.inf, rw, rw),
    ]


class NlpProblem:
    """Built transcription: bounds, constraint evaluation, sparse Jacobian.

    Construction is pure and the object is immutable afterwards; evaluation
    allocates its own workspace, so a built problem can be shared across
    threads.
    """

    def __init__(self, model: RobotModel, task: TaskSpec, schedule: PhaseSchedule):
        if len(task.state_bounds_per_phase) != schedule.num_phases:
            raise ValueError("need one state box per schedule phase")
        if schedule.phases[-1].kind is PhaseKind.FLIGHT:
            raise BadSchedule("flight phase may not end the trajectory")
        if schedule.phases[0].kind is PhaseKind.FLIGHT and not schedule.starts_airborne:
            raise BadSchedule("flight phase may not start the trajectory")

        self.model = model
        self.task = task
        self.schedule = schedule
        self.friction = task.friction if task.friction is not None else model.friction

        N = schedule.num_intervals
        P = schedule.num_phases
        self.num_intervals = N
        self.num_knots = N + 1
        self.num_phase_vars = P

        # phase geometry: knot spans, interval -> phase, knot tags
        starts, ends = [], []
        s = 0
        for p in schedule.phases:
            starts.append(s)
            ends.append(s + p.knots - 1)
            s += p.knots - 1
        self.phase_knot_spans = list(zip(starts, ends))
        self.interval_phase = np.zeros(N, dtype=int)
        for pi, (a, b) in enumerate(self.phase_knot_spans):
            self.interval_phase[a:b] = pi
        self.inv_steps = np.array([1.0 / (p.knots - 1) for p in schedule.phases])
        tags = np.empty(self.num_knots, dtype=object)
        for pi in reversed(range(P)):
            a, b = self.phase_knot_spans[pi]
            tags[a : b + 1] = schedule.phases[pi].kind
        self.knot_tags = tags
        # knot N has no control/force variables of its own
        self.knot_ctrl_idx = np.minimum(np.arange(self.num_knots), N - 1)

        # variable layout
        self.off_controls = STATE_DIM * self.num_knots
        self.off_forces = self.off_controls + 2 * N
        self.off_durations = self.off_forces + 2 * N
        self.num_vars = self.off_durations + P

        self._build_bounds()
        self._build_rows()
        self._build_jacobian_pattern()

        wu = task.energy_weight * np.array(
            [1.0 / model.torque_limit**2, 1.0 / model.force_limit**2]
        )
        self._control_weights = wu
        self.variable_scales = self._build_scales()

    # -- construction ------------------------------------------------------

    def _build_bounds(self) -> None:
        n_knots, N, P = self.num_knots, self.num_intervals, self.num_phase_vars
        lo = np.full((n_knots, STATE_DIM), -np.inf)
        hi = np.full((n_knots, STATE_DIM), np.inf)
        for pi, (a, b) in enumerate(self.phase_knot_spans):
            plo, phi_ = self.task.state_bounds_per_phase[pi]
            lo[a : b + 1] = np.maximum(lo[a : b + 1], plo)
            hi[a : b + 1] = np.minimum(hi[a : b + 1], phi_)
        hi[-1] = np.minimum(hi[-1], self.task.goal_upper)
        lo[-1] = np.maximum(lo[-1], self.task.goal_lower)
        # the first knot is pinned to the start state; the phase box is
        # dropped there so replanning from an observed state stays feasible
        start = self.task.start_state.vector()
        lo[0] = start
        hi[0] = start

        clo, chi = self.task.control_bounds
        ulo = np.tile(clo, (N, 1))
        uhi = np.tile(chi, (N, 1))

        llo = np.full((N, 2), -np.inf)
        lhi = np.full((N, 2), np.inf)
        for t in range(N):
            if self.knot_tags[t] is PhaseKind.FLIGHT:
                llo[t] = lhi[t] = 0.0
            else:
                llo[t, 1] = 0.0  # unilateral normal force

        tlo = np.array([p.duration_bounds[0] for p in self.schedule.phases])
        thi = np.array([p.duration_bounds[1] for p in self.schedule.phases])

        self.lower = np.concatenate([lo.ravel(), ulo.ravel(), llo.ravel(), tlo])
        self.upper = np.concatenate([hi.ravel(), uhi.ravel(), lhi.ravel(), thi])
        bad = self.lower > self.upper
        if np.any(bad):
            raise InfeasibleBounds(
                f"empty variable box for {self.variable_label(int(np.argmax(bad)))}"
            )

    def _build_rows(self) -> None:
        N = self.num_intervals
        self.ground_knots = np.array(
            [k for k in range(self.num_knots) if self.knot_tags[k] is PhaseKind.GROUND],
            dtype=int,
        )
        self.ground_force_idx = np.array(
            [t for t in range(N) if self.knot_tags[t] is PhaseKind.GROUND], dtype=int
        )
        self.off_defect_rows = 0
        self.off_noslip_rows = 10 * N
        self.off_cone_rows = self.off_noslip_rows + len(self.ground_knots)
        self.off_time_rows = self.off_cone_rows + 2 * len(self.ground_force_idx)
        self.num_constraints = self.off_time_rows + 2
        self.is_equality = np.zeros(self.num_constraints, dtype=bool)
        self.is_equality[: self.off_cone_rows] = True

    def _build_jacobian_pattern(self) -> None:
        N = self.num_knots - 1
        xoff = lambda k: STATE_DIM * k
        uoff = self.off_controls + 2 * self.knot_ctrl_idx
        loff = self.off_forces + 2 * self.knot_ctrl_idx
        t = np.arange(N)

        rows, cols = [], []
        sizes = {}

        def group(name, r, c):
            rows.append(r.reshape(-1))
            cols.append(c.reshape(-1))
            sizes[name] = r.size

        i10 = np.arange(10)
        r5 = np.arange(5)
        # identity blocks of the defect
        group("ident_left", (10 * t[:, None] + i10), (10 * t[:, None] + i10))
        group("ident_right", (10 * t[:, None] + i10), (10 * (t[:, None] + 1) + i10))
        # df/dx blocks, position rows couple to velocities one-to-one
        for side, shift in (("left", 0), ("right", 1)):
            tk = t + shift
            group(
                f"posvel_{side}",
                (10 * t[:, None] + r5),
                (10 * tk[:, None] + 5 + r5),
            )
            for nm, vcols in ((f"accq_{side}", (3, 4)), (f"accqd_{side}", (8, 9))):
                group(
                    nm,
                    (10 * t[:, None, None] + 5 + r5[None, :, None] + 0 * np.ones((1, 1, 2), int)),
                    (10 * tk[:, None, None] + np.array(vcols)[None, None, :] + 0 * r5[None, :, None]),
                )
            group(
                f"accu_{side}",
                (10 * t[:, None, None] + 5 + r5[None, :, None] + np.zeros((1, 1, 2), int)),
                (uoff[tk][:, None, None] + np.arange(2)[None, None, :] + 0 * r5[None, :, None]),
            )
            group(
                f"acclam_{side}",
                (10 * t[:, None, None] + 5 + r5[None, :, None] + np.zeros((1, 1, 2), int)),
                (loff[tk][:, None, None] + np.arange(2)[None, None, :] + 0 * r5[None, :, None]),
            )
        group(
            "duration",
            (10 * t[:, None] + i10),
            (self.off_durations + self.interval_phase[t][:, None] + 0 * i10),
        )
        # no-slip rows: xd - R_w * phid at every ground knot
        gk = self.ground_knots
        nrow = self.off_noslip_rows + np.arange(len(gk))
        group("noslip_xd", nrow, xoff(gk) + 5)
        group("noslip_phid", nrow, xoff(gk) + 7)
        # friction cone rows, normalized by the force limit
        gf = self.ground_force_idx
        crow = self.off_cone_rows + 2 * np.arange(len(gf))
        lx = self.off_forces + 2 * gf
        group("cone_lo_x", crow, lx)
        group("cone_lo_z", crow, lx + 1)
        group("cone_hi_x", crow + 1, lx)
        group("cone_hi_z", crow + 1, lx + 1)
        # total-time window rows
        pcols = self.off_durations + np.arange(self.num_phase_vars)
        group("time_min", np.full(self.num_phase_vars, self.off_time_rows), pcols)
        group("time_max", np.full(self.num_phase_vars, self.off_time_rows + 1), pcols)

        self._jac_rows = np.concatenate(rows)
        self._jac_cols = np.concatenate(cols)
        slices, pos = {}, 0
        for name, size in sizes.items():
            slices[name] = slice(pos, pos + size)
            pos += size
        self._jac_slices = slices
        self._jac_nnz = pos

        # constant entries never touched per evaluation
        data = np.zeros(self._jac_nnz)
        data[slices["ident_left"]] = -1.0
        data[slices["ident_right"]] = 1.0
        fs = self.model.force_limit
        mu = self.friction
        data[slices["cone_lo_x"]] = -1.0 / fs
        data[slices["cone_lo_z"]] = mu / fs
        data[slices["cone_hi_x"]] = 1.0 / fs
        data[slices["cone_hi_z"]] = mu / fs
        data[slices["time_min"]] = 1.0
        data[slices["time_max"]] = -1.0
        self._jac_template = data

    def _build_scales(self) -> np.ndarray:
        """Characteristic variable magnitudes, used by quasi-Newton solvers
        whose implicit metric is the identity."""
        state = np.array([1.0, 0.5, 5.0, 0.5, 1.0, 2.0, 2.0, 12.0, 1.5, 3.0])
        control = np.array([self.model.torque_limit, self.model.force_limit])
        force = np.array([0.5, 1.0]) * self.model.force_limit
        return np.concatenate(
            [
                np.tile(state, self.num_knots),
                np.tile(control, self.num_intervals),
                np.tile(force, self.num_intervals),
                np.ones(self.num_phase_vars),
            ]
        )

    # -- packing -----------------------------------------------------------

    def unpack(self, v: np.ndarray):
        v = np.asarray(v, dtype=float)
        if v.shape != (self.num_vars,):
            raise ValueError(f"decision vector must have length {self.num_vars}")
        X = v[: self.off_controls].reshape(self.num_knots, STATE_DIM)
        U = v[self.off_controls : self.off_forces].reshape(-1, 2)
        Lam = v[self.off_forces : self.off_durations].reshape(-1, 2)
        T = v[self.off_durations :]
        return X, U, Lam, T

    def pack(self, X, U, Lam, T) -> np.ndarray:
        return np.concatenate(
            [np.asarray(X).ravel(), np.asarray(U).ravel(), np.asarray(Lam).ravel(), np.asarray(T).ravel()]
        )

    def knot_times(self, durations) -> np.ndarray:
        dt = np.asarray(durations, dtype=float)[self.interval_phase] * self.inv_steps[self.interval_phase]
        return np.concatenate([[0.0], np.cumsum(dt)])

    # -- evaluation --------------------------------------------------------

    def cost(self, v: np.ndarray):
        _, U, _, _ = self.unpack(v)
        w = self._control_weights
        value = float(np.sum(w * U * U))
        grad = np.zeros(self.num_vars)
        grad[self.off_controls : self.off_forces] = (2.0 * w * U).ravel()
        return value, grad

    def constraints(self, v: np.ndarray) -> np.ndarray:
        return self._eval(v, with_jacobian=False)[0]

    def evaluate(self, v: np.ndarray):
        """(cost, gradient, constraint residuals, sparse Jacobian)."""
        c, J = self._eval(v, with_jacobian=True)
        value, grad = self.cost(v)
        return value, grad, c, J

    def _eval(self, v, with_jacobian):
        X, U, Lam, T = self.unpack(v)
        N = self.num_intervals
        knot_u = U[self.knot_ctrl_idx]
        knot_lam = Lam[self.knot_ctrl_idx]
        out = batch_accelerations(
            self.model, X[:, :5], X[:, 5:], knot_u, knot_lam, with_partials=with_jacobian
        )
        f = np.concatenate([X[:, 5:], out["acc"]], axis=1)

        dt = T[self.interval_phase] * self.inv_steps[self.interval_phase]
        defects = X[1:] - X[:-1] - 0.5 * dt[:, None] * (f[:-1] + f[1:])

        c = np.zeros(self.num_constraints)
        c[: 10 * N] = defects.ravel()
        gk = self.ground_knots
        c[self.off_noslip_rows : self.off_cone_rows] = (
            X[gk, 5] - self.model.wheel_radius * X[gk, 7]
        )
        gf = self.ground_force_idx
        fs = self.model.force_limit
        mu = self.friction
        cone = np.empty((len(gf), 2))
        cone[:, 0] = (mu * Lam[gf, 1] - Lam[gf, 0]) / fs
        cone[:, 1] = (mu * Lam[gf, 1] + Lam[gf, 0]) / fs
        c[self.off_cone_rows : self.off_time_rows] = cone.ravel()
        total = float(np.sum(T))
        c[self.off_time_rows] = total - self.schedule.total_time_bounds[0]
        c[self.off_time_rows + 1] = self.schedule.total_time_bounds[1] - total

        if not with_jacobian:
            return c, None

        data = self._jac_template.copy()
        sl = self._jac_slices
        half = 0.5 * dt
        for side, sel in (("left", slice(0, N)), ("right", slice(1, N + 1))):
            data[sl[f"posvel_{side}"]] = np.repeat(-half, 5)
            data[sl[f"accq_{side}"]] = (-half[:, None, None] * out["dacc_dq"][sel]).ravel()
            data[sl[f"accqd_{side}"]] = (-half[:, None, None] * out["dacc_dqd"][sel]).ravel()
            data[sl[f"accu_{side}"]] = (-half[:, None, None] * out["dacc_du"][sel]).ravel()
            data[sl[f"acclam_{side}"]] = (-half[:, None, None] * out["dacc_dlam"][sel]).ravel()
        dsum = -0.5 * self.inv_steps[self.interval_phase][:, None] * (f[:-1] + f[1:])
        data[sl["duration"]] = dsum.ravel()
        data[sl["noslip_xd"]] = 1.0
        data[sl["noslip_phid"]] = -self.model.wheel_radius
        J = sp.coo_matrix(
            (data, (self._jac_rows, self._jac_cols)),
            shape=(self.num_constraints, self.num_vars),
        ).tocsr()
        return c, J

    # -- diagnostics -------------------------------------------------------

    def row_label(self, row: int) -> str:
        if row < self.off_noslip_rows:
            t, comp = divmod(row, 10)
            return f"defect[t={t},{_COMPONENTS[comp]}]"
        if row < self.off_cone_rows:
            return f"noslip[k={self.ground_knots[row - self.off_noslip_rows]}]"
        if row < self.off_time_rows:
            idx, side = divmod(row - self.off_cone_rows, 2)
            name = "hi" if side else "lo"
            return f"cone_{name}[t={self.ground_force_idx[idx]}]"
        return "time_min" if row == self.off_time_rows else "time_max"

    def variable_label(self, col: int) -> str:
        if col < self.off_controls:
            k, comp = divmod(col, STATE_DIM)
            return f"state[k={k},{_COMPONENTS[comp]}]"
        if col < self.off_forces:
            t, comp = divmod(col - self.off_controls, 2)
            return f"control[t={t},{'tau' if comp == 0 else 'f'}]"
        if col < self.off_durations:
            t, comp = divmod(col - self.off_forces, 2)
            return f"force[t={t},{'x' if comp == 0 else 'z'}]"
        return f"duration[phase={col - self.off_durations}]"


def build_nlp(model: RobotModel, task: TaskSpec, schedule: PhaseSchedule) -> NlpProblem:
    """Assemble the transcription NLP for a task over a phase schedule."""
    return NlpProblem(model, task, schedule)


def residuals_and_jacobian(nlp: NlpProblem, point: np.ndarray):
    """(cost, gradient, constraint residuals, sparse Jacobian) at `point`."""
    return nlp.evaluate(point)


def default_guess(nlp: NlpProblem) -> np.ndarray:
    """Deterministic initial iterate: straight-line states, zero controls,
    static ground forces, mid-window durations."""
    start = nlp.task.start_state.vector()
    target = start.copy()
    finite_eq = np.isfinite(nlp.task.goal_lower) & (nlp.task.goal_lower == nlp.task.goal_upper)
    target[finite_eq] = nlp.task.goal_lower[finite_eq]
    interval = np.isfinite(nlp.task.goal_lower) & np.isfinite(nlp.task.goal_upper) & ~finite_eq
    target[interval] = np.clip(start[interval], nlp.task.goal_lower[interval], nlp.task.goal_upper[interval])

    alpha = np.linspace(0.0, 1.0, nlp.num_knots)[:, None]
    X = (1.0 - alpha) * start + alpha * target
    U = np.zeros((nlp.num_intervals, 2))
    Lam = np.zeros((nlp.num_intervals, 2))
    static = nlp.model.total_mass * nlp.model.gravity
    Lam[nlp.ground_force_idx, 1] = static
    T = np.array([0.5 * (p.duration_bounds[0] + p.duration_bounds[1]) for p in nlp.schedule.phases])
    v = nlp.pack(X, U, Lam, T)
    return np.clip(v, nlp.lower, nlp.upper)


def extract_trajectory(nlp: NlpProblem, solution: np.ndarray, status: Optional[str] = None) -> Trajectory:
    """Unpack a decision vector into time-stamped trajectory rows."""
    X, U, Lam, T = nlp.unpack(solution)
    times = nlp.knot_times(T)
    idx = nlp.knot_ctrl_idx
    tags = [tag.value for tag in nlp.knot_tags]
    rows_status = None if status is None else [status] * nlp.num_knots
    return Trajectory(times, X, U[idx], Lam[idx], tags, rows_status)


def pack_trajectory(nlp: NlpProblem, traj: Trajectory, durations) -> np.ndarray:
    """Inverse of `extract_trajectory` for the state/control/force slots."""
    if len(traj) != nlp.num_knots:
        raise ValueError("trajectory row count does not match the transcription")
    N = nlp.num_intervals
    return nlp.pack(traj.states, traj.controls[:N], traj.forces[:N], durations)
