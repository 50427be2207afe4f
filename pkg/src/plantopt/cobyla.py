"""Derivative-free linear-approximation trust-region solver.

Minimizes f(x) subject to inequality constraints g_k(x) >= 0 and box bounds,
in the style of Powell's COBYLA: a nondegenerate simplex of m+1 points
supplies linear interpolants of the objective and every constraint, a
two-stage linear program proposes a step inside an l-infinity trust region
(first driving down the worst linearized violation, then the objective
subject to that violation level), and candidates are judged by the merit
function f + mu * max(0, -min_k g_k) with a penalty that only ever grows.
The trust radius halves from rho_beg down to rho_end.

Box bounds are enforced twice: hard bounds on the LP step keep every iterate
inside the box, and the same bounds are appended as constraints so the merit
function sees them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import SolverError, ValidationError

CONVERGED = "converged"
MAXFUN_REACHED = "maxfun_reached"

_SHORT_STEP_FACTOR = 0.5
_CONDITION_LIMIT = 1e8
_VIOLATION_MARGIN = 1e-9


@dataclass(frozen=True)
class CobylaSettings:
    """Trust-region schedule and evaluation budget."""

    rho_beg: float = 0.1
    rho_end: float = 1e-4
    maxfun: int = 1000

    def __post_init__(self):
        if not 0.0 < self.rho_end < self.rho_beg:
            raise ValidationError("need 0 < rho_end < rho_beg")
        if self.maxfun < 3:
            raise ValidationError("maxfun must allow at least a simplex plus one step")

    def to_dict(self) -> dict:
        return {"rho_beg": self.rho_beg, "rho_end": self.rho_end, "maxfun": self.maxfun}


@dataclass(frozen=True)
class CobylaResult:
    """Best point found, preferring feasible ones, with diagnostics."""

    x: np.ndarray
    fun: float
    status: str
    evaluations: int
    max_violation: float
    merit_history: tuple[tuple[float, float], ...]

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).copy()
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "merit_history", tuple(self.merit_history))


class _BudgetExhausted(Exception):
    pass


class _Evaluator:
    """Counts evaluations, validates outputs, and keeps the full history."""

    def __init__(self, fun, constraints, lower, upper, maxfun):
        self.fun = fun
        self.constraints = list(constraints)
        self.lower = lower
        self.upper = upper
        self.maxfun = maxfun
        self.nfev = 0
        self.points: list[np.ndarray] = []
        self.f_values: list[float] = []
        self.g_vectors: list[np.ndarray] = []
        self.violations: list[float] = []

    def __call__(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        if self.nfev >= self.maxfun:
            raise _BudgetExhausted()
        self.nfev += 1
        f_value = float(self.fun(x))
        if math.isnan(f_value):
            raise SolverError(f"objective returned NaN at x={x!r}")
        g = np.empty(len(self.constraints) + 2 * x.size)
        for k, constraint in enumerate(self.constraints):
            g[k] = float(constraint(x))
        n_user = len(self.constraints)
        g[n_user : n_user + x.size] = x - self.lower
        g[n_user + x.size :] = self.upper - x
        if np.any(np.isnan(g)):
            raise SolverError(f"a constraint returned NaN at x={x!r}")
        self.points.append(x.copy())
        self.f_values.append(f_value)
        self.g_vectors.append(g)
        self.violations.append(float(max(0.0, -g.min()) if g.size else 0.0))
        return f_value, g


def _two_stage_step(grad_f, g_base, grads_g, step_box):
    """Powell's subproblem: minimize worst linearized violation, then the
    linearized objective subject to that violation level."""
    m = grad_f.size
    n_g = g_base.size
    # rows: -grad_g . d - v <= g_base
    a_ub = np.hstack([-grads_g, -np.ones((n_g, 1))])
    b_ub = g_base
    c_stage1 = np.zeros(m + 1)
    c_stage1[m] = 1.0
    lp_bounds = [tuple(b) for b in step_box] + [(0.0, None)]
    first = linprog(c_stage1, A_ub=a_ub, b_ub=b_ub, bounds=lp_bounds, method="highs")
    if not first.success:
        return None
    v_star = max(0.0, float(first.x[m]))

    c_stage2 = np.concatenate([grad_f, [0.0]])
    lp_bounds[m] = (0.0, v_star + _VIOLATION_MARGIN)
    second = linprog(c_stage2, A_ub=a_ub, b_ub=b_ub, bounds=lp_bounds, method="highs")
    if not second.success:
        return first.x[:m]
    return second.x[:m]


def cobyla_minimize(
    fun,
    constraints,
    x0,
    bounds,
    settings: CobylaSettings | None = None,
) -> CobylaResult:
    """Minimize fun subject to g_k(x) >= 0 and box bounds, derivative-free.

    `constraints` is a sequence of callables; feasibility means every one is
    nonnegative. `bounds` is an (m, 2) array of (lower, upper) pairs. The
    start point must lie inside the bounds. Returns the best point by merit;
    running out of budget is reported via status, not an exception.
    """
    settings = settings if settings is not None else CobylaSettings()
    x0 = np.asarray(x0, dtype=float).copy()
    m = x0.size
    bounds = np.asarray(bounds, dtype=float)
    if x0.ndim != 1 or bounds.shape != (m, 2):
        raise ValidationError("x0 must be length m and bounds shape (m, 2)")
    lower, upper = bounds[:, 0].copy(), bounds[:, 1].copy()
    if np.any(lower > upper):
        raise ValidationError("each lower bound must be <= its upper bound")
    if np.any(x0 < lower - 1e-12) or np.any(x0 > upper + 1e-12):
        raise ValidationError("x0 must lie within the bounds")
    x0 = np.clip(x0, lower, upper)
    if settings.maxfun < m + 2:
        raise ValidationError(f"maxfun must be >= m + 2 = {m + 2}")

    evaluate = _Evaluator(fun, constraints, lower, upper, settings.maxfun)
    mu = 0.0
    merit_history: list[tuple[float, float]] = []
    status = CONVERGED

    def merit_of(index: int) -> float:
        return evaluate.f_values[index] + mu * evaluate.violations[index]

    def best_index() -> int:
        merits = np.array(evaluate.f_values) + mu * np.array(evaluate.violations)
        return int(np.argmin(merits))

    def simplex_step(center: np.ndarray, i: int, rho: float) -> np.ndarray:
        vertex = center.copy()
        span = upper[i] - lower[i]
        step = min(rho, 0.5 * span) if span > 0.0 else 0.0
        if vertex[i] + step <= upper[i]:
            vertex[i] += step
        else:
            vertex[i] -= step
        return vertex

    try:
        rho = settings.rho_beg
        # initial simplex: x0 plus axis steps folded to stay inside the box
        vertices = [x0] + [simplex_step(x0, i, rho) for i in range(m)]
        vertex_ids = []
        for vertex in vertices:
            evaluate(vertex)
            vertex_ids.append(len(evaluate.points) - 1)
        best = best_index()
        merit_history.append((mu, merit_of(best)))
        geometry_fresh = True

        def respan(center_id: int, rho: float) -> list[int]:
            center = evaluate.points[center_id]
            ids = [center_id]
            for i in range(m):
                evaluate(simplex_step(center, i, rho))
                ids.append(len(evaluate.points) - 1)
            return ids

        while True:
            merits = [merit_of(i) for i in vertex_ids]
            base_pos = int(np.argmin(merits))
            base_id = vertex_ids[base_pos]
            base = evaluate.points[base_id]

            others = [i for pos, i in enumerate(vertex_ids) if pos != base_pos]
            edges = np.array([evaluate.points[i] - base for i in others])
            edge_norms = np.linalg.norm(edges, axis=1)
            degenerate = (
                np.any(edge_norms < 1e-3 * rho)
                or np.any(edge_norms > 10.0 * rho)
                or np.linalg.cond(edges) > _CONDITION_LIMIT
            )
            if degenerate and not geometry_fresh:
                vertex_ids = respan(base_id, rho)
                geometry_fresh = True
                continue

            f_base = evaluate.f_values[base_id]
            g_base = evaluate.g_vectors[base_id]
            delta_f = np.array([evaluate.f_values[i] - f_base for i in others])
            delta_g = np.array([evaluate.g_vectors[i] - g_base for i in others])
            # least squares handles structurally flat directions (tied bounds)
            solution = np.linalg.lstsq(edges, np.column_stack([delta_f, delta_g]), rcond=None)[0]
            grad_f = solution[:, 0]
            grads_g = solution[:, 1:].T

            step_box = np.column_stack(
                [np.maximum(-rho, lower - base), np.minimum(rho, upper - base)]
            )
            d = _two_stage_step(grad_f, g_base, grads_g, step_box)
            if d is None or np.max(np.abs(d)) < _SHORT_STEP_FACTOR * rho:
                # the model sees no worthwhile step at this scale; trust that
                # only when the simplex is freshly spanned at scale rho
                if not geometry_fresh:
                    vertex_ids = respan(base_id, rho)
                    geometry_fresh = True
                    continue
                if rho * 0.5 < settings.rho_end:
                    status = CONVERGED
                    break
                rho *= 0.5
                vertex_ids = respan(base_id, rho)
                continue

            viol_base = evaluate.violations[base_id]
            linear_g_new = g_base + grads_g @ d
            viol_linear = float(max(0.0, -linear_g_new.min()))
            predicted_f_change = float(grad_f @ d)
            violation_reduction = viol_base - viol_linear
            predicted_merit_drop = -predicted_f_change + mu * violation_reduction
            if predicted_merit_drop <= 0.0 and violation_reduction > 1e-15:
                mu = max(2.0 * mu, 1.5 * predicted_f_change / violation_reduction)
                best = best_index()
            predicted_merit_drop = max(
                -predicted_f_change + mu * violation_reduction, 1e-15
            )

            base_merit = merit_of(base_id)
            model_was_fresh = geometry_fresh
            candidate = np.clip(base + d, lower, upper)
            evaluate(candidate)
            candidate_id = len(evaluate.points) - 1
            candidate_merit = merit_of(candidate_id)

            if candidate_merit < merit_of(best):
                best = candidate_id
                merit_history.append((mu, candidate_merit))

            worst_pos = int(np.argmax([merit_of(i) for i in vertex_ids]))
            if candidate_merit < merit_of(vertex_ids[worst_pos]):
                vertex_ids[worst_pos] = candidate_id
                geometry_fresh = False

            achieved_drop = base_merit - candidate_merit
            if achieved_drop < 0.1 * predicted_merit_drop:
                # poor agreement with the model: freshen geometry, then shrink
                if model_was_fresh:
                    if rho * 0.5 < settings.rho_end:
                        status = CONVERGED
                        break
                    rho *= 0.5
                vertex_ids = respan(best, rho)
                geometry_fresh = True
    except _BudgetExhausted:
        status = MAXFUN_REACHED

    best = _final_selection(evaluate, mu)
    return CobylaResult(
        x=evaluate.points[best],
        fun=evaluate.f_values[best],
        status=status,
        evaluations=evaluate.nfev,
        max_violation=evaluate.violations[best],
        merit_history=tuple(merit_history),
    )


def _final_selection(evaluate: _Evaluator, mu: float) -> int:
    """Best evaluated point: lowest objective among the (near-)feasible ones,
    falling back to lowest merit when nothing is feasible."""
    f_values = np.array(evaluate.f_values)
    violations = np.array(evaluate.violations)
    feasible = violations <= 1e-11
    if feasible.any():
        ids = np.flatnonzero(feasible)
        return int(ids[np.argmin(f_values[ids])])
    return int(np.argmin(f_values + mu * violations))
