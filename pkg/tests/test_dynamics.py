import math

import numpy as np
import pytest

from ccrrt.constraints import ObstacleField, allocate_risk
from ccrrt.dynamics import (
    ConstraintViolation,
    GoalRegion,
    InputConstraint,
    LTIModel,
    Penalty,
    lti_step,
    objective,
    path_inputs,
    rollout,
    single_integrator,
)
from ccrrt.probability import Gaussian2D


def test_identity_step_with_zero_input():
    m = LTIModel(np.eye(3), np.eye(3))
    x = np.array([1.0, -2.0, 0.5])
    nxt, y = lti_step(m, x, np.zeros(3))
    np.testing.assert_array_equal(nxt, x)
    np.testing.assert_array_equal(y, x)


def test_single_integrator_step():
    nxt, _ = lti_step(single_integrator(1.0), [0, 0], [1, 2])
    np.testing.assert_array_equal(nxt, [1, 2])


def test_output_matrix():
    m = LTIModel(np.eye(2), np.eye(2), C=[[1.0, 1.0]])
    _, y = lti_step(m, [2.0, 3.0], [0, 0])
    np.testing.assert_array_equal(y, [5.0])


def test_dimension_mismatch():
    m = single_integrator()
    with pytest.raises(ValueError):
        lti_step(m, [0, 0, 0], [0, 0])
    with pytest.raises(ValueError):
        lti_step(m, [0, 0], [0])
    with pytest.raises(ValueError):
        LTIModel(np.eye(2), np.eye(3))


def test_input_box():
    m = single_integrator(max_step=0.5)
    lti_step(m, [0, 0], [0.5, -0.5])
    with pytest.raises(ConstraintViolation):
        lti_step(m, [0, 0], [0.6, 0.0])
    with pytest.raises(ValueError):
        InputConstraint([1.0], [0.0])


class TestRollout:
    def test_start_in_goal(self):
        _, t = rollout(single_integrator(), [5, 0], [[1, 0]] * 3, GoalRegion((5, 0), 0.5))
        assert t == 0

    def test_goal_time(self):
        states, t = rollout(single_integrator(), [0, 0], [[1, 0]] * 10, GoalRegion((5, 0), 0.5))
        assert t == 5
        assert len(states) == 11
        assert not any(GoalRegion((5, 0), 0.5).contains(s) for s in states[:t])

    def test_never_reached(self):
        _, t = rollout(single_integrator(), [0, 0], [[0, 0]] * 10, GoalRegion((5, 0), 0.5))
        assert t is None

    def test_replays_waypoints(self):
        path = np.array([[0, 0], [0.5, 0.2], [1.0, 0.9], [1.2, 1.5]])
        states, t = rollout(single_integrator(), path[0], path_inputs(path), GoalRegion((1.2, 1.5), 0.1))
        np.testing.assert_allclose(states, path, atol=1e-15)
        assert t == 3

    def test_superposition(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            a = rng.normal(scale=0.4, size=(4, 4))
            b = rng.normal(size=(4, 2))
            m = LTIModel(a, b)
            x0, x1 = rng.normal(size=4), rng.normal(size=4)
            u0, u1 = rng.normal(size=(20, 2)), rng.normal(size=(20, 2))
            s0, _ = rollout(m, x0, u0)
            s1, _ = rollout(m, x1, u1)
            s, _ = rollout(m, x0 + x1, u0 + u1)
            np.testing.assert_allclose(s, s0 + s1, rtol=1e-9, atol=1e-12)


class TestObjective:
    def test_no_penalty(self):
        assert objective(np.zeros((6, 2)), 5) == 5.0
        assert objective(np.zeros((6, 2)), 5, Penalty("none")) == 5.0

    def test_zero_weight(self):
        field = ObstacleField([Gaussian2D([0, 0], np.eye(2))], allocate_risk(0.05, 1))
        assert objective([[3, 0], [2.6, 0], [4, 0]], 2, Penalty("clearance", 0.0, 2.0), field) == 2.0

    def test_clearance_penalty_by_hand(self):
        field = ObstacleField([Gaussian2D([0, 0], np.eye(2))], allocate_risk(0.05, 1))
        thr = -2 * math.log(0.05)
        # T^2 = 9, 6.76, 16; only the middle point is within margin 2 of the threshold
        expected = 2 + 0.5 * (2 - (6.76 - thr))
        got = objective([[3, 0], [2.6, 0], [4, 0]], 2, Penalty("clearance", 0.5, 2.0), field)
        assert got == pytest.approx(expected, rel=1e-12)
        assert got == pytest.approx(2.6157322735, abs=1e-9)

    def test_at_least_t_goal(self):
        field = ObstacleField([Gaussian2D([0, 0], np.eye(2))], allocate_risk(0.05, 1))
        rng = np.random.default_rng(2)
        states = rng.uniform(-5, 5, (8, 2))
        assert objective(states, 7, Penalty("clearance", 3.0, 5.0), field) >= 7

    def test_bad_t_goal(self):
        with pytest.raises(ValueError):
            objective(np.zeros((3, 2)), 4)

    def test_unknown_penalty(self):
        with pytest.raises(ValueError):
            Penalty("smoothness")
