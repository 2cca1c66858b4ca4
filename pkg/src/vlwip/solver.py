"""Augmented-Lagrangian solver for the transcribed trajectory NLPs.

Equality rows enter the classic multiplier-penalty term; inequality rows
(c_i(v) >= 0) use the squared-hinge (PHR) form, which keeps the subproblem
gradient continuous.  Each outer iteration minimizes the augmented
Lagrangian over the variable box with L-BFGS-B, then either updates the
multiplier estimates (when the constraint violation made enough progress)
or raises the penalty.

A solve never trusts its own bookkeeping: Converged is only reported after
an independent KKT re-check at the final point, and on any other status the
best-feasibility iterate seen so far is returned so a receding-horizon
caller can still act on it.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Optional, TextIO

import numpy as np
import scipy.optimize

_PENALTY_CAP = 1e14


class NanEvaluation(RuntimeError):
    """A constraint or cost evaluation produced a non-finite value."""


class SolveStatus(enum.Enum):
    CONVERGED = "converged"
    MAX_ITERS = "max_iters"
    INFEASIBLE = "infeasible"
    TIME_BUDGET = "time_budget"


@dataclass
class SolverOptions:
    constraint_tol: float = 1e-6
    optimality_tol: float = 1e-4
    max_outer_iters: int = 50
    max_inner_iters: int = 500
    initial_penalty: float = 10.0
    penalty_growth: float = 10.0
    time_budget: Optional[float] = None
    lbfgs_memory: int = 20
    log_stream: Optional[TextIO] = None

    def __post_init__(self) -> None:
        if min(self.constraint_tol, self.optimality_tol, self.initial_penalty) <= 0.0:
            raise ValueError("tolerances and penalty must be positive")
        if self.penalty_growth <= 1.0:
            raise ValueError("penalty growth must exceed 1")


@dataclass
class SolveReport:
    status: SolveStatus
    constraint_violation: float
    optimality: float
    outer_iters: int
    inner_iters: int
    wall_time: float
    cost: float = np.nan
    multipliers: Optional[np.ndarray] = None
    violation_history: list = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status is SolveStatus.CONVERGED


def _check_finite(nlp, cost, grad, residuals):
    if not np.isfinite(cost) or not np.all(np.isfinite(grad)):
        raise NanEvaluation("cost or cost gradient is not finite")
    bad = ~np.isfinite(residuals)
    if np.any(bad):
        row = int(np.argmax(bad))
        raise NanEvaluation(f"constraint {nlp.row_label(row)} evaluated to a non-finite value")


def kkt_check(nlp, point, multipliers):
    """Independent first-order measures at (point, multipliers).

    Returns (stationarity, violation, complementarity): the projected
    Lagrangian gradient step, the worst equality/inequality/bound violation,
    and the worst inequality complementarity product (negative inequality
    multipliers count against complementarity).
    """
    point = np.asarray(point, dtype=float)
    w = np.asarray(multipliers, dtype=float)
    cost, grad, c, J = nlp.evaluate(point)
    _check_finite(nlp, cost, grad, c)
    lagr_grad = grad - J.T @ w
    step = np.clip(point - lagr_grad, nlp.lower, nlp.upper) - point
    stationarity = float(np.max(np.abs(step))) if step.size else 0.0

    eq = nlp.is_equality
    violation = 0.0
    if np.any(eq):
        violation = float(np.max(np.abs(c[eq])))
    if np.any(~eq):
        violation = max(violation, float(np.max(np.maximum(0.0, -c[~eq]))))
    finite_lo = np.isfinite(nlp.lower)
    finite_hi = np.isfinite(nlp.upper)
    if np.any(finite_lo):
        violation = max(violation, float(np.max(np.maximum(0.0, nlp.lower[finite_lo] - point[finite_lo]))))
    if np.any(finite_hi):
        violation = max(violation, float(np.max(np.maximum(0.0, point[finite_hi] - nlp.upper[finite_hi]))))

    complementarity = 0.0
    if np.any(~eq):
        wi = w[~eq]
        complementarity = float(np.max(np.abs(wi * c[~eq])))
        complementarity = max(complementarity, float(np.max(np.maximum(0.0, -wi))))
    return stationarity, violation, complementarity


def solve(nlp, initial_guess, opts: Optional[SolverOptions] = None):
    """Minimize the NLP cost subject to its constraints and variable box.

    Returns (solution, SolveReport).  Statuses other than Converged are
    ordinary returns carrying the best-feasibility iterate; only non-finite
    user evaluations raise.
    """
    opts = opts or SolverOptions()
    t0 = time.perf_counter()
    lb, ub = nlp.lower, nlp.upper
    x = np.clip(np.asarray(initial_guess, dtype=float), lb, ub)
    eq = nlp.is_equality
    ineq = ~eq
    m = nlp.num_constraints

    # inner solves run in scaled variables so the quasi-Newton identity
    # metric sees comparable magnitudes across states, controls and forces
    d = np.asarray(getattr(nlp, "variable_scales", np.ones(nlp.num_vars)), dtype=float)
    bounds = scipy.optimize.Bounds(lb / d, ub / d)

    y = np.zeros(m)  # eq rows: multiplier; ineq rows: PHR multiplier (>= 0)
    rho = opts.initial_penalty
    omega = max(opts.optimality_tol, min(1e-2, 100.0 * opts.optimality_tol))
    eta = max(0.125 / rho**0.1, 10.0 * opts.constraint_tol)

    inner_total = 0
    history = []
    best = {"viol": np.inf, "cost": np.inf, "x": x.copy(), "w": y.copy(),
            "stat": np.inf}

    def al_value_and_grad(s):
        v = s * d
        cost, grad, c, J = nlp.evaluate(v)
        _check_finite(nlp, cost, grad, c)
        ce = c[eq]
        w = np.zeros(m)
        w[eq] = y[eq] - rho * ce
        w[ineq] = np.maximum(0.0, y[ineq] - rho * c[ineq])
        value = (
            cost
            - float(y[eq] @ ce)
            + 0.5 * rho * float(ce @ ce)
            + (0.5 / rho) * float(np.sum(w[ineq] ** 2 - y[ineq] ** 2))
        )
        grad_al = grad - J.T @ w
        return value, grad_al * d

    status = SolveStatus.MAX_ITERS
    stat = viol = np.inf
    outer = 0
    for outer in range(1, opts.max_outer_iters + 1):
        res = scipy.optimize.minimize(
            al_value_and_grad,
            x / d,
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options=dict(
                maxiter=opts.max_inner_iters,
                maxfun=4 * opts.max_inner_iters,
                maxcor=opts.lbfgs_memory,
                ftol=1e-16,
                gtol=omega,
            ),
        )
        x = np.clip(res.x * d, lb, ub)
        inner_total += int(res.nit)

        cost, grad, c, J = nlp.evaluate(x)
        _check_finite(nlp, cost, grad, c)
        what = np.zeros(m)
        what[eq] = y[eq] - rho * c[eq]
        what[ineq] = np.maximum(0.0, y[ineq] - rho * c[ineq])
        viol = 0.0
        if np.any(eq):
            viol = float(np.max(np.abs(c[eq])))
        if np.any(ineq):
            viol = max(viol, float(np.max(np.maximum(0.0, -c[ineq]))))
        lagr_grad = grad - J.T @ what
        step = np.clip(x - lagr_grad, lb, ub) - x
        stat = float(np.max(np.abs(step))) if step.size else 0.0

        history.append(viol)
        if opts.log_stream is not None:
            opts.log_stream.write(
                f"outer {outer:3d}  cost {cost: .6e}  violation {viol:.3e}  penalty {rho:.1e}\n"
            )

        if (viol, cost) < (best["viol"], best["cost"]):
            best = {"viol": viol, "cost": cost, "x": x.copy(), "w": what.copy(), "stat": stat}

        if viol <= opts.constraint_tol and stat <= opts.optimality_tol:
            status = SolveStatus.CONVERGED
            best = {"viol": viol, "cost": cost, "x": x.copy(), "w": what.copy(), "stat": stat}
            break

        if viol <= max(eta, opts.constraint_tol):
            y = np.where(eq, what, np.maximum(0.0, what))
            eta = max(eta / rho**0.9, 0.5 * opts.constraint_tol)
            omega = opts.optimality_tol if viol <= opts.constraint_tol else max(omega / 5.0, opts.optimality_tol)
        else:
            rho = min(rho * opts.penalty_growth, _PENALTY_CAP)
            eta = max(0.125 / rho**0.1, 10.0 * opts.constraint_tol)
            if rho >= _PENALTY_CAP and len(history) >= 3 and history[-1] > 0.9 * history[-3] \
                    and viol > 1e-2:
                status = SolveStatus.INFEASIBLE
                break

        if opts.time_budget is not None and time.perf_counter() - t0 > opts.time_budget:
            status = SolveStatus.TIME_BUDGET
            break

    x_out, w_out = best["x"], best["w"]
    if status is SolveStatus.CONVERGED:
        # honesty: never report convergence on internal bookkeeping alone
        stat2, viol2, _ = kkt_check(nlp, x_out, w_out)
        if viol2 > opts.constraint_tol or stat2 > opts.optimality_tol:
            status = SolveStatus.MAX_ITERS
        else:
            best["viol"], best["stat"] = viol2, stat2

    report = SolveReport(
        status=status,
        constraint_violation=float(best["viol"]),
        optimality=float(best["stat"]),
        outer_iters=outer,
        inner_iters=inner_total,
        wall_time=time.perf_counter() - t0,
        cost=float(best["cost"]),
        multipliers=w_out,
        violation_history=history,
    )
    return x_out, report
