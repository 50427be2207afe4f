"""Tests for the linear-approximation trust-region solver.

The three analytic problems have known optima, so the solver output is
checked against closed-form answers rather than against another solver.
"""
import numpy as np
import pytest

from plantopt.cobyla import (
    CONVERGED,
    MAXFUN_REACHED,
    CobylaResult,
    CobylaSettings,
    cobyla_minimize,
)
from plantopt.errors import SolverError, ValidationError


def quadratic_1d(x):
    return (x[0] - 0.3) ** 2


def disc_objective(x):
    return x[0] * x[1]


def disc_constraint(x):
    return 1.0 - x[0] ** 2 - x[1] ** 2


def chain_objective(x):
    return (x[0] - 1.0) ** 2 + x[1] ** 2


CHAIN_CONSTRAINTS = [
    lambda x: 0.2 - (x[0] - x[1]),
    lambda x: 0.2 - (x[1] - x[0]),
]


# ---------------------------------------------------------------- settings


def test_settings_defaults():
    s = CobylaSettings()
    assert s.rho_beg == 0.1
    assert s.rho_end == 1e-4
    assert s.maxfun == 1000


def test_settings_rejects_bad_radii():
    with pytest.raises(ValidationError):
        CobylaSettings(rho_beg=1e-4, rho_end=0.1)
    with pytest.raises(ValidationError):
        CobylaSettings(rho_beg=0.1, rho_end=0.0)


def test_settings_rejects_tiny_budget():
    with pytest.raises(ValidationError):
        CobylaSettings(maxfun=2)


def test_settings_serialization():
    s = CobylaSettings(rho_beg=0.2, rho_end=1e-5, maxfun=300)
    assert s.to_dict() == {"rho_beg": 0.2, "rho_end": 1e-5, "maxfun": 300}


# ------------------------------------------------------------- validation


def test_rejects_mismatched_bounds_shape():
    with pytest.raises(ValidationError):
        cobyla_minimize(quadratic_1d, [], np.array([0.5]), [[0.0, 1.0], [0.0, 1.0]])


def test_rejects_inverted_bounds():
    with pytest.raises(ValidationError):
        cobyla_minimize(quadratic_1d, [], np.array([0.5]), [[1.0, 0.0]])


def test_rejects_start_outside_bounds():
    with pytest.raises(ValidationError):
        cobyla_minimize(quadratic_1d, [], np.array([1.5]), [[0.0, 1.0]])


def test_rejects_budget_below_simplex_size():
    with pytest.raises(ValidationError):
        cobyla_minimize(
            chain_objective,
            [],
            np.array([0.5, 0.5]),
            [[0.0, 1.0], [0.0, 1.0]],
            CobylaSettings(maxfun=3),
        )


def test_nan_objective_raises():
    with pytest.raises(SolverError):
        cobyla_minimize(lambda x: float("nan"), [], np.array([0.5]), [[0.0, 1.0]])


def test_nan_constraint_raises():
    with pytest.raises(SolverError):
        cobyla_minimize(
            quadratic_1d, [lambda x: float("nan")], np.array([0.5]), [[0.0, 1.0]]
        )


# ------------------------------------------------------ analytic problems


def test_interior_quadratic_from_random_starts():
    # minimum at x = 0.3 with f = 0, strictly inside the box
    for seed in range(10):
        rng = np.random.default_rng([1, seed])
        start = rng.uniform(0.0, 1.0, 1)
        result = cobyla_minimize(quadratic_1d, [], start, [[0.0, 1.0]])
        assert abs(result.fun) <= 1e-3
        assert abs(result.x[0] - 0.3) <= 0.04
        assert result.status == CONVERGED


def test_disc_problem_from_random_starts():
    # min x0*x1 on the unit disc: f = -0.5 at (1/sqrt2, -1/sqrt2) and its mirror
    for seed in range(10):
        rng = np.random.default_rng([2, seed])
        start = rng.uniform(-1.0, 1.0, 2)
        result = cobyla_minimize(
            disc_objective,
            [disc_constraint],
            start,
            [[-1.5, 1.5], [-1.5, 1.5]],
        )
        assert abs(result.fun - (-0.5)) <= 1e-3
        assert result.max_violation <= 1e-9
        assert result.status == CONVERGED


def test_chain_constrained_quadratic_from_random_starts():
    # min (x0-1)^2 + x1^2 with |x0-x1| <= 0.2: optimum (0.6, 0.4), f = 0.32
    for seed in range(10):
        rng = np.random.default_rng([3, seed])
        start = rng.uniform(0.0, 1.0, 2)
        result = cobyla_minimize(
            chain_objective,
            CHAIN_CONSTRAINTS,
            start,
            [[0.0, 1.0], [0.0, 1.0]],
        )
        assert abs(result.fun - 0.32) <= 1e-3
        assert np.max(np.abs(result.x - np.array([0.6, 0.4]))) <= 0.05
        assert result.max_violation <= 1e-9


# -------------------------------------------------------------- invariants


def test_every_evaluation_stays_inside_bounds():
    seen = []

    def recording_objective(x):
        seen.append(x.copy())
        return (x[0] - 0.9) ** 2 + (x[1] - 0.1) ** 2

    cobyla_minimize(
        recording_objective,
        [lambda x: 0.15 - abs(x[0] - x[1])],
        np.array([0.2, 0.8]),
        [[0.0, 1.0], [0.0, 1.0]],
    )
    points = np.array(seen)
    assert points.size > 0
    assert np.all(points >= -1e-12)
    assert np.all(points <= 1.0 + 1e-12)


def test_returned_point_respects_bounds():
    for seed in range(5):
        rng = np.random.default_rng([4, seed])
        start = rng.uniform(0.0, 1.0, 3)
        result = cobyla_minimize(
            lambda x: (x[0] - 2.0) ** 2 + (x[1] + 1.0) ** 2 + x[2] ** 2,
            [],
            start,
            [[0.0, 1.0]] * 3,
        )
        assert np.all(result.x >= -1e-9)
        assert np.all(result.x <= 1.0 + 1e-9)


def test_merit_history_monotone_within_constant_penalty():
    for seed in range(10):
        rng = np.random.default_rng([9, seed])
        start = rng.uniform(0.0, 1.0, 3)
        result = cobyla_minimize(
            lambda x: (x[0] - 0.9) ** 2 + (x[1] - 0.1) ** 2 + (x[2] - 0.5) ** 2,
            [
                lambda x: 0.15 - abs(x[0] - x[1]),
                lambda x: 0.15 - abs(x[1] - x[2]),
            ],
            start,
            [[0.0, 1.0]] * 3,
        )
        history = result.merit_history
        assert len(history) >= 1
        penalties = [entry[0] for entry in history]
        assert penalties == sorted(penalties)
        for (mu_a, merit_a), (mu_b, merit_b) in zip(history, history[1:]):
            if mu_a == mu_b:
                assert merit_b < merit_a


def test_tiny_budget_reports_maxfun_reached():
    result = cobyla_minimize(
        quadratic_1d,
        [],
        np.array([0.9]),
        [[0.0, 1.0]],
        CobylaSettings(maxfun=4),
    )
    assert result.status == MAXFUN_REACHED
    assert result.evaluations == 4
    assert 0.0 <= result.x[0] <= 1.0


def test_budget_never_exceeded():
    for maxfun in (5, 12, 40):
        result = cobyla_minimize(
            disc_objective,
            [disc_constraint],
            np.array([0.8, 0.8]),
            [[-1.5, 1.5], [-1.5, 1.5]],
            CobylaSettings(maxfun=maxfun),
        )
        assert result.evaluations <= maxfun


def test_deterministic_given_same_inputs():
    def run():
        return cobyla_minimize(
            chain_objective,
            CHAIN_CONSTRAINTS,
            np.array([0.25, 0.75]),
            [[0.0, 1.0], [0.0, 1.0]],
        )

    first, second = run(), run()
    assert np.array_equal(first.x, second.x)
    assert first.fun == second.fun
    assert first.evaluations == second.evaluations
    assert first.merit_history == second.merit_history


def test_pinned_dimension_is_handled():
    # one coordinate fixed by equal bounds; solver optimizes the free one
    result = cobyla_minimize(
        lambda x: (x[0] - 0.3) ** 2 + x[1] ** 2,
        [],
        np.array([0.8, 0.5]),
        [[0.0, 1.0], [0.5, 0.5]],
    )
    assert result.x[1] == 0.5
    assert abs(result.fun - 0.25) <= 1e-3


def test_infeasible_problem_returns_least_bad_point():
    # constraint can never be met; solver still returns something sensible
    result = cobyla_minimize(
        quadratic_1d,
        [lambda x: -1.0 - x[0] ** 2],
        np.array([0.5]),
        [[0.0, 1.0]],
    )
    assert result.max_violation > 0.0
    assert 0.0 <= result.x[0] <= 1.0


def test_result_x_is_immutable():
    result = cobyla_minimize(quadratic_1d, [], np.array([0.5]), [[0.0, 1.0]])
    with pytest.raises(ValueError):
        result.x[0] = 99.0
