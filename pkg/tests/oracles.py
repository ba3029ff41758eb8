"""Independent reference computations shared by the test modules."""

import itertools
import math

import numpy as np

from ccrrt.constraints import Workspace
from ccrrt.dynamics import GoalRegion, Penalty
from ccrrt.planner import PlannerParams, Tree, extend
from ccrrt.scenario import Scenario


def dist(p, q):
    dx, dy = q[0] - p[0], q[1] - p[1]
    return math.sqrt(dx * dx + dy * dy)


def costs_from_parents(pos, parents):
    """Cost-to-come of every node, or None if ``parents`` has a cycle."""
    n = len(pos)
    cost = [None] * n
    cost[0] = 0.0
    for _ in range(n):
        for i in range(1, n):
            p = parents[i]
            if cost[i] is None and cost[p] is not None:
                cost[i] = cost[p] + dist(pos[p], pos[i])
    return None if any(c is None for c in cost) else cost


def random_tree(rng, n):
    """Tree with ``n`` nodes at random positions and random parent links."""
    pos = [tuple(rng.uniform(-1.0, 1.0, 2).tolist()) for _ in range(n)]
    tree = Tree(pos[0])
    for i in range(1, n):
        p = int(rng.integers(0, i))
        e = dist(pos[p], pos[i])
        tree._append(pos[i][0], pos[i][1], p, e, tree.cost(p) + e, tree.depth(p) + 1)
    return tree


def rewire_by_enumeration(tree, q_new, field):
    """Best parent for ``q_new`` and best achievable cost of every node.

    Tries every feasible parent for the new node and every subset of the
    other nodes to hang below it.  Returns ``(parent, costs)`` where
    ``costs[i]`` is the lowest cost of node ``i`` over all acyclic
    configurations (the new node is last).  Cost ties for the parent go to
    the node nearest ``q_new``, then to the smallest id.  ``field`` must be
    static and all nodes are taken as neighbours.
    """
    n = len(tree)
    pos = [tree.position(i) for i in range(n)] + [tuple(q_new)]
    base = [tree.parent(i) if i else -1 for i in range(n)]
    ok = [field.segment_feasible(pos[i], q_new) for i in range(n)]
    i_nearest = min(range(n), key=lambda i: (dist(pos[i], q_new), i))
    via = {i: tree.cost(i) + dist(pos[i], q_new) for i in range(n) if ok[i]}
    if not ok[i_nearest]:
        return None, None
    parent = min(via, key=lambda i: (via[i], i != i_nearest, i))
    best = None
    for p in via:
        movable = [j for j in range(1, n) if ok[j] and j != p]
        for r in range(len(movable) + 1):
            for subset in itertools.combinations(movable, r):
                par = base + [p]
                for j in subset:
                    par[j] = n
                cost = costs_from_parents(pos, par)
                if cost is None:
                    continue
                best = cost if best is None else [min(a, b) for a, b in zip(best, cost)]
    return parent, best


def run_rewire_instance(rng, field, n_max=5):
    """Insert one random point into a random small tree with ``extend``.

    Returns ``((parent, costs), (oracle_parent, oracle_costs))``, or
    ``None`` when the step was blocked.
    """
    n = int(rng.integers(1, n_max + 1))
    tree = random_tree(rng, n)
    q = tuple(rng.uniform(-1.0, 1.0, 2).tolist())
    # radius and step large enough that every node is a neighbour
    params = PlannerParams(goal=GoalRegion((5.0, 5.0), 0.1), eta=100.0, gamma=1e6)
    oracle = rewire_by_enumeration(tree, q, field)
    node = extend(tree, q, field, params)
    if node is None:
        assert oracle == (None, None)
        return None
    tree.check()
    return (node.parent, tree.costs.tolist()), oracle


def make_scenario(field, start, goal_center, goal_radius=0.5, lower=(-2.0, -2.0), upper=(9.0, 12.0), **planner):
    goal = GoalRegion(goal_center, goal_radius)
    return Scenario(Workspace(lower, upper), field, tuple(start), goal,
                    PlannerParams(goal=goal, **planner), Penalty(), "delta")


def dense_segment_min(gaussians, p, q, n=10_000):
    """Minimum squared Mahalanobis distance over ``n`` evenly spaced points."""
    s = np.linspace(0.0, 1.0, n)[:, None]
    pts = np.asarray(p, float) + s * (np.asarray(q, float) - np.asarray(p, float))
    out = []
    for g in gaussians:
        d = pts - g.mu
        out.append(np.einsum("ij,jk,ik->i", d, g.sigma_inv, d).min())
    return np.array(out)
