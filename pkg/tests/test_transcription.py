import numpy as np
import pytest

from vlwip.dynamics import RobotModel, State
from vlwip.tasks import drive_task, jump_task, static_task, upright_state
from vlwip.transcription import (
    BadSchedule,
    InfeasibleBounds,
    InvalidGap,
    Phase,
    PhaseKind,
    PhaseSchedule,
    Trajectory,
    build_nlp,
    default_guess,
    extract_trajectory,
    jump_phase_bounds,
    pack_trajectory,
    residuals_and_jacobian,
)

MODEL = RobotModel()


def fd_point(nlp, rng):
    """Random point inside bounds with infinite sides replaced by a sane box."""
    lo = nlp.lower.copy()
    hi = nlp.upper.copy()
    lo[~np.isfinite(lo)] = np.where(
        np.arange(nlp.num_vars)[~np.isfinite(nlp.lower)] >= nlp.off_forces, -150.0, -2.0
    )
    hi[~np.isfinite(hi)] = np.where(
        np.arange(nlp.num_vars)[~np.isfinite(nlp.upper)] >= nlp.off_forces, 150.0, 2.0
    )
    return lo + rng.random(nlp.num_vars) * (hi - lo)


def fd_jacobian(nlp, v, cols=None):
    c0 = nlp.constraints(v)
    cols = range(nlp.num_vars) if cols is None else cols
    J = np.zeros((len(c0), len(list(cols))))
    for out_j, j in enumerate(cols):
        h = 1e-6 * max(1.0, abs(v[j]))
        vp, vm = v.copy(), v.copy()
        vp[j] += h
        vm[j] -= h
        J[:, out_j] = (nlp.constraints(vp) - nlp.constraints(vm)) / (2 * h)
    return J


def max_rel_err(a, b):
    return np.max(np.abs(a - b) / np.maximum(1.0, np.maximum(np.abs(a), np.abs(b))))


class TestLayout:
    def test_drive_variable_count(self):
        task, schedule = drive_task(MODEL, intervals=50, horizon=3.0)
        nlp = build_nlp(MODEL, task, schedule)
        assert nlp.num_vars == 10 * 51 + 2 * 50 + 2 * 50 + 1 == 711

    def test_jump_variable_count(self):
        task, schedule = jump_task(MODEL, knots=(40, 20, 40))
        nlp = build_nlp(MODEL, task, schedule)
        N = 39 + 19 + 39
        assert nlp.num_intervals == N == 97
        assert nlp.num_vars == 10 * (N + 1) + 2 * N + 2 * N + 3

    def test_boundary_knot_tags_take_left_phase(self):
        task, schedule = jump_task(MODEL, knots=(4, 3, 4))
        nlp = build_nlp(MODEL, task, schedule)
        # spans: ground 0..3, flight 3..5, ground 5..8
        assert nlp.knot_tags[3] is PhaseKind.GROUND  # takeoff rolls
        assert nlp.knot_tags[4] is PhaseKind.FLIGHT
        assert nlp.knot_tags[5] is PhaseKind.FLIGHT  # touchdown force-free
        assert nlp.knot_tags[6] is PhaseKind.GROUND

    def test_every_constraint_row_has_an_entry(self):
        task, schedule = jump_task(MODEL, knots=(5, 3, 5))
        nlp = build_nlp(MODEL, task, schedule)
        _, _, _, J = nlp.evaluate(default_guess(nlp))
        counts = np.diff(J.indptr)
        assert np.all(counts > 0)


class TestBoundsAndErrors:
    def test_flight_on_boundary_rejected(self):
        task, schedule = jump_task(MODEL, knots=(4, 3, 4))
        bad = PhaseSchedule(schedule.phases[:2], (0.3, 5.0))
        with pytest.raises(BadSchedule):
            build_nlp(MODEL, task.__class__(**{**task.__dict__, "state_bounds_per_phase": task.state_bounds_per_phase[:2]}), bad)

    def test_airborne_start_allowed_when_flagged(self):
        task, schedule = jump_task(MODEL, knots=(4, 3, 4))
        start = State([1.2, 0.5, 0.0, 0.4, 0.0], [2.0, 0.5, 10.0, 0.0, 0.0])
        receded = PhaseSchedule(schedule.phases[1:], (0.2, 5.0), starts_airborne=True)
        import dataclasses

        task2 = dataclasses.replace(
            task,
            start_state=start,
            state_bounds_per_phase=task.state_bounds_per_phase[1:],
        )
        nlp = build_nlp(MODEL, task2, receded)
        assert nlp.knot_tags[0] is PhaseKind.FLIGHT

    def test_infeasible_goal_vs_phase_box(self):
        task, schedule = drive_task(MODEL, intervals=5)
        import dataclasses

        bad = dataclasses.replace(
            task,
            goal_lower=np.concatenate([[50.0], np.full(9, -np.inf)]),
            goal_upper=np.concatenate([[50.0], np.full(9, np.inf)]),
        )
        with pytest.raises(InfeasibleBounds):
            build_nlp(MODEL, bad, schedule)

    def test_invalid_gap(self):
        with pytest.raises(InvalidGap):
            jump_phase_bounds((1.0, 1.0), (0.2, 0.8), 1.0, 0.17)

    def test_jump_bounds_structure(self):
        pre, flight, post = jump_phase_bounds((1.0, 1.6), (0.2, 0.8), 1.0, 0.17)
        assert pre[0][1] == pre[1][1] == 0.17  # z pinned to wheel radius
        assert pre[1][0] == 1.0  # x upper at near edge
        assert post[0][0] == 1.6  # x lower at far edge
        assert flight[0][1] == 0.17 and flight[1][1] == 1.0
        for lo, hi in (pre, flight, post):
            assert lo[3] == 0.2 and hi[3] == 0.8
            assert lo[4] == -np.pi / 2 and hi[4] == np.pi / 2

    def test_degenerate_height_cap_pins_flight_to_ground(self):
        pre, flight, post = jump_phase_bounds((1.0, 1.6), (0.2, 0.8), 0.17, 0.17)
        assert flight[0][1] == flight[1][1] == 0.17


class TestStaticFeasibility:
    def test_static_trajectory_satisfies_everything(self):
        task, schedule = static_task(MODEL, intervals=10, horizon=1.0)
        nlp = build_nlp(MODEL, task, schedule)
        X = np.tile(task.start_state.vector(), (nlp.num_knots, 1))
        U = np.tile([0.0, MODEL.body_mass * MODEL.gravity], (nlp.num_intervals, 1))
        Lam = np.tile([0.0, MODEL.total_mass * MODEL.gravity], (nlp.num_intervals, 1))
        v = nlp.pack(X, U, Lam, [1.0])
        c = nlp.constraints(v)
        eq = c[nlp.is_equality]
        ineq = c[~nlp.is_equality]
        assert np.max(np.abs(eq)) < 1e-10
        assert np.min(ineq) > -1e-10
        assert np.all(v >= nlp.lower - 1e-12) and np.all(v <= nlp.upper + 1e-12)


class TestDerivatives:
    def test_cost_gradient_is_scaled_controls(self):
        task, schedule = drive_task(MODEL, intervals=8)
        nlp = build_nlp(MODEL, task, schedule)
        rng = np.random.default_rng(0)
        v = fd_point(nlp, rng)
        value, grad = nlp.cost(v)
        _, U, _, _ = nlp.unpack(v)
        w = task.energy_weight * np.array(
            [1.0 / MODEL.torque_limit**2, 1.0 / MODEL.force_limit**2]
        )
        assert value == pytest.approx(float(np.sum(w * U * U)))
        expect = np.zeros(nlp.num_vars)
        expect[nlp.off_controls : nlp.off_forces] = (2.0 * w * U).ravel()
        assert np.allclose(grad, expect)

    @pytest.mark.parametrize("builder,kwargs", [
        (static_task, dict(intervals=4)),
        (drive_task, dict(intervals=6)),
        (jump_task, dict(knots=(4, 3, 4))),
    ])
    def test_jacobian_matches_finite_differences(self, builder, kwargs):
        task, schedule = builder(MODEL, **kwargs)
        nlp = build_nlp(MODEL, task, schedule)
        rng = np.random.default_rng(1)
        for _ in range(3):
            v = fd_point(nlp, rng)
            _, _, _, J = nlp.evaluate(v)
            assert max_rel_err(J.toarray(), fd_jacobian(nlp, v)) < 1e-5

    def test_jacobian_sparsity_is_fixed(self):
        task, schedule = drive_task(MODEL, intervals=5)
        nlp = build_nlp(MODEL, task, schedule)
        rng = np.random.default_rng(2)
        _, _, _, J1 = nlp.evaluate(fd_point(nlp, rng))
        _, _, _, J2 = nlp.evaluate(fd_point(nlp, rng))
        assert np.array_equal(J1.indices, J2.indices)
        assert np.array_equal(J1.indptr, J2.indptr)


class TestTrajectoryExtraction:
    def test_two_knot_times(self):
        task, schedule = static_task(MODEL, intervals=1, horizon=1.0)
        nlp = build_nlp(MODEL, task, schedule)
        traj = extract_trajectory(nlp, default_guess(nlp))
        assert np.allclose(traj.t, [0.0, 1.0])

    def test_jump_row_count_and_tags(self):
        task, schedule = jump_task(MODEL, knots=(40, 20, 40))
        nlp = build_nlp(MODEL, task, schedule)
        v = default_guess(nlp)
        X, U, Lam, _ = nlp.unpack(v)
        v = nlp.pack(X, U, Lam, [1.0, 0.5, 0.8])
        traj = extract_trajectory(nlp, v)
        assert len(traj) == 98
        assert traj.t[-1] == pytest.approx(2.3)
        assert traj.phases.count("Flight") == 19  # knots 40..58
        assert np.all(np.diff(traj.t) > 0)

    def test_pack_extract_round_trip(self):
        task, schedule = jump_task(MODEL, knots=(5, 3, 5))
        nlp = build_nlp(MODEL, task, schedule)
        rng = np.random.default_rng(3)
        v = fd_point(nlp, rng)
        _, _, _, T = nlp.unpack(v)
        traj = extract_trajectory(nlp, v)
        v2 = pack_trajectory(nlp, traj, T)
        assert np.allclose(v2, v)

    def test_default_guess_inside_bounds(self):
        for builder, kwargs in [
            (drive_task, dict(intervals=10)),
            (jump_task, dict(knots=(6, 4, 6))),
        ]:
            task, schedule = builder(MODEL, **kwargs)
            nlp = build_nlp(MODEL, task, schedule)
            v = default_guess(nlp)
            assert np.all(v >= nlp.lower) and np.all(v <= nlp.upper)

    def test_residuals_and_jacobian_alias(self):
        task, schedule = static_task(MODEL, intervals=3)
        nlp = build_nlp(MODEL, task, schedule)
        v = default_guess(nlp)
        cost, grad, c, J = residuals_and_jacobian(nlp, v)
        cost2, grad2, c2, J2 = nlp.evaluate(v)
        assert cost == cost2 and np.array_equal(c, c2)

    def test_trajectory_time_monotonicity_enforced(self):
        with pytest.raises(ValueError):
            Trajectory(
                [0.0, 0.0],
                np.zeros((2, 10)),
                np.zeros((2, 2)),
                np.zeros((2, 2)),
                ["Ground", "Ground"],
            )

    def test_row_labels(self):
        task, schedule = jump_task(MODEL, knots=(4, 3, 4))
        nlp = build_nlp(MODEL, task, schedule)
        assert nlp.row_label(0) == "defect[t=0,x]"
        assert nlp.row_label(nlp.off_noslip_rows).startswith("noslip")
        assert nlp.row_label(nlp.off_cone_rows).startswith("cone_lo")
        assert nlp.row_label(nlp.num_constraints - 1) == "time_max"
