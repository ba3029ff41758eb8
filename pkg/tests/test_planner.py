import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccrrt.constraints import Obstacle, ObstacleField, RiskConfig, Workspace, allocate_risk
from ccrrt.dynamics import GoalRegion
from ccrrt.planner import (
    InfeasibleStartError,
    GoalBlockedError,
    PlannerParams,
    Tree,
    default_gamma,
    extend,
    near,
    near_radius,
    nearest,
    plan,
    plan_multiagent,
    sample,
    steer,
    verify_path,
)
from ccrrt.probability import Gaussian2D
from ccrrt.scenario import load_scenario

from oracles import make_scenario, random_tree, run_rewire_instance

GOAL = GoalRegion((6.0, 10.0), 0.5)


@pytest.fixture(scope="module")
def scene():
    return load_scenario("paper_sec5.json")


class TestPrimitives:
    def test_nearest_tie_goes_to_smallest_id(self):
        tree = Tree((1.0, 0.0))
        tree._append(-1.0, 0.0, 0, 2.0, 2.0, 1)
        assert nearest(tree, (0.0, 0.0)).id == 0
        tree._append(0.0, 0.5, 0, 1.0, 1.0, 1)
        assert nearest(tree, (0.0, 0.0)).id == 2

    def test_nearest_examples(self):
        tree = Tree((0.0, 0.0))
        assert nearest(tree, (5.0, 5.0)).id == 0
        tree._append(2.0, 0.0, 0, 2.0, 2.0, 1)
        assert nearest(tree, (0.9, 0.0)).id == 0

    def test_steer_within_reach(self):
        assert steer((0, 0), (0.3, 0.4), 0.6) == (0.3, 0.4)
        assert steer((0, 0), (0.5, 0), 1.0) == (0.5, 0)
        assert steer((0, 0), (2, 0), 1.0) == (1.0, 0.0)
        assert steer((1, 1), (1, 1), 1.0) == (1, 1)

    def test_steer_clips(self):
        x, y = steer((0, 0), (3, 4), 1.0)
        assert (x, y) == pytest.approx((0.6, 0.8), abs=1e-15)

    def test_steer_needs_positive_eta(self):
        with pytest.raises(ValueError):
            steer((0, 0), (1, 1), 0.0)

    @given(st.tuples(st.floats(-50, 50), st.floats(-50, 50)),
           st.tuples(st.floats(-50, 50), st.floats(-50, 50)), st.floats(0.01, 10))
    def test_steer_properties(self, a, b, eta):
        q = steer(a, b, eta)
        assert math.dist(a, q) <= eta * (1 + 1e-12)
        if math.dist(a, b) <= eta:
            assert q == (float(b[0]), float(b[1]))

    def test_near_radius(self):
        assert near_radius(100, 10.0, 5.0) == pytest.approx(2.1460, abs=1e-4)
        assert near_radius(1, 10.0, 5.0) == 5.0
        assert near_radius(2, 1e6, 0.6) == 0.6

    def test_near_radius_shrinks(self):
        r = [near_radius(n, 10.0, 100.0) for n in range(3, 2000, 50)]
        assert all(a > b for a, b in zip(r, r[1:]))

    def test_default_gamma(self):
        assert default_gamma(154.0) == pytest.approx(2 * math.sqrt(3 * 154 / math.pi))

    def test_near_returns_ids_in_order(self):
        tree = Tree((0.0, 0.0))
        for x in (0.1, 5.0, -0.2):
            tree._append(x, 0.0, 0, abs(x), abs(x), 1)
        params = PlannerParams(goal=GOAL, eta=0.5, gamma=1e6)
        assert [nd.id for nd in near(tree, (0.0, 0.0), len(tree), params)] == [0, 1, 3]

    def test_params_validation(self):
        for kw in ({"eta": 0}, {"goal_bias": 1.0}, {"variant": "prm"}, {"edge_cost": "time"}, {"seed": -1}):
            with pytest.raises(ValueError):
                PlannerParams(goal=GOAL, **kw)


class TestSample:
    def test_golden_stream(self, scene):
        rng = np.random.default_rng(2024)
        got = [sample(scene.workspace, GOAL, scene.planner, rng) for _ in range(3)]
        expected = [
            (0.3575552136208344, 2.332328432343684),
            (8.953823087520135, -0.008754586079274818),
            (-0.010938049334598965, 3.035056483650913),
        ]
        assert got == expected

    def test_full_bias_returns_goal(self, scene):
        params = PlannerParams(goal=GOAL, goal_bias=0.999999)
        rng = np.random.default_rng(0)
        assert all(sample(scene.workspace, GOAL, params, rng) == GOAL.center for _ in range(20))

    def test_degenerate_box(self):
        box = SimpleNamespace(lower=(2.0, 3.0), upper=(2.0, 3.0))
        params = PlannerParams(goal=GOAL, goal_bias=0.0)
        assert sample(box, GOAL, params, np.random.default_rng(1)) == (2.0, 3.0)

    def test_three_draws_per_call(self, scene):
        a, b = np.random.default_rng(5), np.random.default_rng(5)
        sample(scene.workspace, GOAL, PlannerParams(goal=GOAL, goal_bias=0.0), a)
        sample(scene.workspace, GOAL, PlannerParams(goal=GOAL, goal_bias=0.5), b)
        assert a.random() == b.random()

    def test_samples_in_workspace(self, scene):
        rng = np.random.default_rng(3)
        params = PlannerParams(goal=GOAL, goal_bias=0.0)
        pts = [sample(scene.workspace, GOAL, params, rng) for _ in range(500)]
        assert all(scene.workspace.contains(p) for p in pts)


class TestExtend:
    def test_empty_field_step_is_eta(self):
        tree = Tree((0.0, 0.0))
        node = extend(tree, (10.0, 0.0), ObstacleField.empty(), PlannerParams(goal=GOAL, eta=0.6))
        assert node.position == (0.6, 0.0)
        assert node.cost == 0.6 and node.depth == 1

    def test_blocked_by_ellipse(self):
        field = ObstacleField([Gaussian2D([1.0, 0.0], np.eye(2) * 0.1)], allocate_risk(0.05, 1))
        tree = Tree((0.0, 0.0))
        assert extend(tree, (2.0, 0.0), field, PlannerParams(goal=GOAL, eta=3.0)) is None
        assert len(tree) == 1

    def test_same_point_is_a_no_op(self):
        tree = Tree((0.0, 0.0))
        assert extend(tree, (0.0, 0.0), ObstacleField.empty(), PlannerParams(goal=GOAL)) is None

    def test_rewire_example(self):
        # the detour through (0, 1) is replaced by a straight line through the new node
        tree = Tree((0.0, 0.0))
        tree._append(0.0, 1.0, 0, 1.0, 1.0, 1)
        tree._append(2.0, 0.0, 1, math.sqrt(5), 1 + math.sqrt(5), 2)
        params = PlannerParams(goal=GOAL, eta=5.0, gamma=1e6)
        node = extend(tree, (1.0, 0.0), ObstacleField.empty(), params)
        assert node.parent == 0 and node.cost == 1.0
        assert tree.parent(2) == node.id
        assert tree.cost(2) == 2.0 and tree.depth(2) == 2
        tree.check()

    def test_rewire_propagates_to_subtree(self):
        tree = Tree((0.0, 0.0))
        tree._append(-1.0, 1.0, 0, math.sqrt(2), math.sqrt(2), 1)
        tree._append(0.0, 2.0, 1, math.sqrt(2), 2 * math.sqrt(2), 2)
        tree._append(0.0, 3.0, 2, 1.0, 2 * math.sqrt(2) + 1, 3)
        params = PlannerParams(goal=GOAL, eta=1.0, gamma=1e6)
        node = extend(tree, (0.0, 1.0), ObstacleField.empty(), params)
        assert tree.parent(2) == node.id
        assert tree.cost(3) == 3.0 and tree.depth(3) == 3
        tree.check()

    def test_rewiring_matches_enumeration(self):
        rng = np.random.default_rng(99)
        field = ObstacleField([Gaussian2D([0.1, 0.0], [[0.02, 0.01], [0.01, 0.03]])], allocate_risk(0.1, 1))
        done = 0
        while done < 40:
            out = run_rewire_instance(rng, field)
            if out is None:
                continue
            (parent, costs), (want_parent, want_costs) = out
            assert parent == want_parent
            assert costs == want_costs
            done += 1

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_rewiring_never_raises_costs(self, seed):
        rng = np.random.default_rng(seed)
        tree = random_tree(rng, int(rng.integers(1, 12)))
        before = tree.costs
        params = PlannerParams(goal=GOAL, eta=0.8, gamma=3.0)
        node = extend(tree, tuple(rng.uniform(-1, 1, 2)), ObstacleField.empty(), params)
        after = tree.costs
        assert np.all(after[: len(before)] <= before)
        if node is not None:
            assert after[: len(before)].sum() <= before.sum()
        tree.check()

    def test_tree_stays_valid_each_iteration(self, scene):
        params = scene.planner.with_gamma(scene.workspace.area)
        rng = np.random.default_rng(4)
        tree = Tree(scene.start)
        for _ in range(300):
            extend(tree, sample(scene.workspace, GOAL, params, rng), scene.field, params)
            tree.check()
        assert len(tree) > 50


class TestPlan:
    def test_finds_verified_path(self, scene):
        res = plan(scene)
        assert res.found and res.path_verified
        assert res.feasibility_certificates.all()
        assert np.array_equal(res.best_path[0], scene.start)
        assert GOAL.contains(res.best_path[-1])
        assert res.cost == pytest.approx(res.path_length, rel=1e-12)
        assert res.objective == len(res.best_path) - 1

    def test_deterministic(self, scene):
        params = PlannerParams(goal=GOAL, max_iterations=800, seed=12)
        assert plan(scene, params).to_dict() == plan(scene, params).to_dict()

    def test_seed_changes_tree(self, scene):
        a = plan(scene, PlannerParams(goal=GOAL, max_iterations=300, seed=1))
        b = plan(scene, PlannerParams(goal=GOAL, max_iterations=300, seed=2))
        assert not np.array_equal(a.positions, b.positions)

    def test_rrt_costs_are_sums_of_edges(self, scene):
        res = plan(scene, PlannerParams(goal=GOAL, max_iterations=2000, variant="rrt", seed=3))
        assert res.found and res.path_verified
        assert res.cost == pytest.approx(res.path_length, rel=1e-12)

    def test_unit_step_cost_is_depth(self, scene):
        res = plan(scene, PlannerParams(goal=GOAL, max_iterations=1500, edge_cost="unit_step", seed=5))
        np.testing.assert_array_equal(res.costs, res.depths)

    def test_start_in_goal(self, scene):
        sc = make_scenario(scene.field, (6.0, 10.0), (6.0, 10.0), max_iterations=50)
        res = plan(sc)
        assert res.best_node == 0 and res.cost == 0.0
        np.testing.assert_array_equal(res.best_path, [[6.0, 10.0]])

    def test_stop_at_goal(self, scene):
        sc = make_scenario(scene.field, (6.0, 10.0), (6.0, 10.0), max_iterations=50, stop_at_goal=True)
        res = plan(sc)
        assert res.iterations_used == 0 and res.num_nodes == 1

    def test_infeasible_start(self, scene):
        with pytest.raises(InfeasibleStartError):
            plan(make_scenario(scene.field, (1.0, 1.0), (6.0, 10.0)))

    def test_goal_blocked(self, scene):
        with pytest.raises(GoalBlockedError):
            plan(make_scenario(scene.field, (0.0, 0.0), (6.0, 8.8), goal_radius=0.2))

    def test_no_path_when_walled_off(self):
        # a wide flat obstacle splits a narrow workspace in two
        g = Gaussian2D([0.0, 0.0], [[0.01, 0.0], [0.0, 25.0]])
        field = ObstacleField([g], allocate_risk(0.05, 1))
        sc = make_scenario(field, (-1.5, 0.0), (1.5, 0.0), lower=(-2, -3), upper=(2, 3), max_iterations=300)
        res = plan(sc)
        assert not res.found and res.status == "no_path"
        assert res.cost is None and res.path_verified is None

    def test_verify_path(self, scene):
        assert verify_path([[0, 0], [-2, 0], [-2, 3]], scene.field)
        assert not verify_path([[0, 0], [2, 2]], scene.field)
        assert not verify_path([[1, 1]], scene.field)

    def test_result_dict_shape(self, scene):
        d = plan(scene, PlannerParams(goal=GOAL, max_iterations=200)).to_dict()
        assert len(d["nodes"]) == len(d["edges"]) + 1
        assert len(d["feasibility_certificates"]) == len(d["edges"])


class TestMultiagent:
    def test_single_agent_equals_plan(self, scene):
        params = PlannerParams(goal=GOAL, max_iterations=600, seed=8)
        [res] = plan_multiagent([scene], params)
        assert res.to_dict() == plan(scene, params).to_dict()

    def test_far_apart_corridors(self):
        # separate workspaces: neither tree ever comes near the other agent
        field = ObstacleField.empty(0.1)
        a = make_scenario(field, (0.0, 0.0), (0.0, 8.0), lower=(-2, -2), upper=(2, 10), max_iterations=600)
        b = make_scenario(field, (10.0, 0.0), (10.0, 8.0), lower=(8, -2), upper=(12, 10), max_iterations=600, seed=4)
        ra, rb = plan_multiagent([a, b])
        assert ra.found and rb.found
        np.testing.assert_array_equal(ra.best_path, plan(a).best_path)
        np.testing.assert_array_equal(rb.best_path, plan(b).best_path)

    def test_crossing_agents_stay_separated(self):
        field = ObstacleField.empty(0.1)
        a = make_scenario(field, (0.0, 4.0), (8.0, 4.0), max_iterations=1500, seed=1)
        b = make_scenario(field, (4.0, 0.0), (4.0, 8.0), max_iterations=1500, seed=2)
        ra, rb = plan_multiagent([a, b])
        assert ra.found and rb.found
        cov = np.eye(2) * 0.05
        other = Obstacle(Gaussian2D(ra.best_path[0], cov),
                         {t: ra.best_path[t] - ra.best_path[0] for t in range(1, len(ra.best_path))})
        check = ObstacleField([other], RiskConfig(0.1, 1, 0.1))
        assert verify_path(rb.best_path, check)

    def test_blocked_agent_reported(self):
        field = ObstacleField.empty(0.1)
        a = make_scenario(field, (0.0, 0.0), (0.0, 8.0), max_iterations=300)
        ra, rb = plan_multiagent([a, a])
        assert ra.found
        assert rb.status == "infeasible_start" and not rb.found
