"""Chance-constrained RRT and RRT* over a planar workspace.

The tree only ever contains edges whose whole segment stays outside every
obstacle's risk ellipse, so any root-to-goal path meets the per-step
collision budget of its ``ObstacleField``.  Tree depth doubles as the
discrete time step: an edge leaving a node of depth ``k`` is checked against
the obstacle means at steps ``k`` and ``k + 1``.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np

from .constraints import Obstacle, ObstacleField, RiskConfig
from .dynamics import GoalRegion, objective
from .probability import Gaussian2D

if TYPE_CHECKING:
    from .scenario import Scenario

__all__ = [
    "GoalBlockedError",
    "InfeasibleStartError",
    "Node",
    "PlanResult",
    "PlannerParams",
    "Tree",
    "default_gamma",
    "extend",
    "near",
    "near_radius",
    "nearest",
    "plan",
    "plan_multiagent",
    "sample",
    "steer",
    "verify_path",
]

logger = logging.getLogger(__name__)

VARIANTS = ("rrt", "rrt_star")
EDGE_COSTS = ("euclidean", "unit_step")


class InfeasibleStartError(ValueError):
    """The start point lies inside a risk ellipse."""


class GoalBlockedError(ValueError):
    """Every probed point of the goal region lies inside a risk ellipse."""


def default_gamma(area: float) -> float:
    """Rewiring constant ``2 * sqrt(3 * area / pi)`` for a planar workspace."""
    return 2.0 * math.sqrt(3.0 * area / math.pi)


@dataclass(frozen=True)
class PlannerParams:
    goal: GoalRegion
    eta: float = 0.6
    gamma: Optional[float] = None
    max_iterations: int = 5000
    goal_bias: float = 0.05
    variant: str = "rrt_star"
    edge_cost: str = "euclidean"
    seed: int = 0
    # stop as soon as the goal region is reached; off by default
    stop_at_goal: bool = False

    def __post_init__(self):
        if not self.eta > 0.0:
            raise ValueError(f"eta must be positive, got {self.eta!r}")
        if self.gamma is not None and not self.gamma > 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")
        if not 0.0 <= self.goal_bias < 1.0:
            raise ValueError(f"goal_bias must lie in [0, 1), got {self.goal_bias!r}")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.edge_cost not in EDGE_COSTS:
            raise ValueError(f"edge_cost must be one of {EDGE_COSTS}, got {self.edge_cost!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def with_gamma(self, area: float) -> "PlannerParams":
        if self.gamma is not None:
            return self
        return dataclasses.replace(self, gamma=default_gamma(area))


@dataclass(frozen=True)
class Node:
    id: int
    position: tuple[float, float]
    parent: Optional[int]
    cost: float
    depth: int


class Tree:
    """Growable planner graph indexed by node id; node 0 is the root.

    Coordinates live in numpy buffers for vectorised distance queries;
    per-node scalars are plain lists.  Edges are implied by parent links.
    """

    def __init__(self, root, capacity: int = 1024):
        capacity = max(int(capacity), 1)
        self._x = np.empty(capacity)
        self._y = np.empty(capacity)
        self._cost: list[float] = []
        self._edge: list[float] = []
        self._depth: list[int] = []
        self._parent: list[int] = []
        self.children: list[list[int]] = []
        self.n = 0
        self._append(float(root[0]), float(root[1]), -1, 0.0, 0.0, 0)

    def __len__(self) -> int:
        return self.n

    def _append(self, x, y, parent, edge, cost, depth) -> int:
        i = self.n
        if i == len(self._x):
            for name in ("_x", "_y"):
                old = getattr(self, name)
                new = np.empty(2 * len(old))
                new[:i] = old
                setattr(self, name, new)
        self._x[i] = x
        self._y[i] = y
        self._parent.append(parent)
        self._edge.append(edge)
        self._cost.append(cost)
        self._depth.append(depth)
        self.children.append([])
        if parent >= 0:
            self.children[parent].append(i)
        self.n += 1
        return i

    @property
    def positions(self) -> np.ndarray:
        return np.column_stack([self._x[: self.n], self._y[: self.n]])

    @property
    def parents(self) -> np.ndarray:
        return np.array(self._parent, dtype=np.int64)

    @property
    def costs(self) -> np.ndarray:
        return np.array(self._cost, dtype=float)

    @property
    def depths(self) -> np.ndarray:
        return np.array(self._depth, dtype=np.int64)

    def position(self, i: int) -> tuple[float, float]:
        return float(self._x[i]), float(self._y[i])

    def cost(self, i: int) -> float:
        return self._cost[i]

    def depth(self, i: int) -> int:
        return self._depth[i]

    def parent(self, i: int) -> Optional[int]:
        p = self._parent[i]
        return None if p < 0 else p

    def node(self, i: int) -> Node:
        return Node(i, self.position(i), self.parent(i), self._cost[i], self._depth[i])

    def nodes(self) -> list[Node]:
        return [self.node(i) for i in range(self.n)]

    def sq_dists(self, q) -> np.ndarray:
        dx = self._x[: self.n] - q[0]
        dy = self._y[: self.n] - q[1]
        dx *= dx
        dy *= dy
        dx += dy
        return dx

    def path_ids(self, i: int) -> list[int]:
        ids = []
        while i >= 0:
            ids.append(i)
            i = self._parent[i]
        return ids[::-1]

    def path(self, i: int) -> np.ndarray:
        ids = self.path_ids(i)
        return np.column_stack([self._x[ids], self._y[ids]])

    def subtree(self, i: int) -> list[int]:
        out, stack = [], [i]
        while stack:
            j = stack.pop()
            out.append(j)
            stack.extend(self.children[j])
        return out

    def reparent(self, i: int, new_parent: int, edge_cost: float) -> None:
        """Move ``i`` under ``new_parent`` and refresh cost and depth of its subtree."""
        parent, cost, depth, edge, children = self._parent, self._cost, self._depth, self._edge, self.children
        children[parent[i]].remove(i)
        children[new_parent].append(i)
        parent[i] = new_parent
        edge[i] = edge_cost
        stack = [i]
        while stack:
            j = stack.pop()
            p = parent[j]
            cost[j] = cost[p] + edge[j]
            depth[j] = depth[p] + 1
            stack.extend(children[j])

    def check(self, edge_cost: str = "euclidean", tol: float = 1e-9) -> None:
        """Raise ``AssertionError`` unless the tree is a valid rooted tree with
        consistent costs and depths."""
        n = self.n
        par = self._parent
        assert par[0] == -1, "node 0 must be the root"
        assert all(0 <= p < n for p in par[1:]), "dangling parent link"
        for i in range(1, n):
            seen, j = 0, i
            while j != 0:
                j = par[j]
                seen += 1
                assert seen <= n, f"cycle through node {i}"
        for i in range(1, n):
            p = par[i]
            assert i in self.children[p]
            e = _edge_cost(self.position(p), self.position(i), edge_cost)
            assert abs(self._cost[i] - (self._cost[p] + e)) <= tol * max(1.0, self._cost[i])
            assert self._depth[i] == self._depth[p] + 1
        assert sum(len(c) for c in self.children) == n - 1


def _edge_cost(p, q, kind: str) -> float:
    if kind == "unit_step":
        return 1.0
    dx, dy = q[0] - p[0], q[1] - p[1]
    return math.sqrt(dx * dx + dy * dy)


def sample(workspace, goal: GoalRegion, params: PlannerParams, rng: np.random.Generator) -> tuple[float, float]:
    """Goal-biased uniform sample over the workspace box.

    Consumes exactly three uniforms per call (coin, x, y) whatever the
    outcome, so the stream position does not depend on ``goal_bias``.
    """
    coin, ux, uy = rng.random(3).tolist()
    if coin < params.goal_bias:
        return goal.center
    lo, hi = workspace.lower, workspace.upper
    return lo[0] + ux * (hi[0] - lo[0]), lo[1] + uy * (hi[1] - lo[1])


def nearest(tree: Tree, q) -> Node:
    """Node closest to ``q``; ties go to the smallest id."""
    if len(tree) == 0:
        raise ValueError("nearest() on an empty tree")
    return tree.node(int(np.argmin(tree.sq_dists(q))))


def steer(frm, to, eta: float) -> tuple[float, float]:
    """Move from ``frm`` toward ``to`` by at most ``eta``."""
    if not eta > 0.0:
        raise ValueError("eta must be positive")
    dx, dy = to[0] - frm[0], to[1] - frm[1]
    dist = math.hypot(dx, dy)
    if dist <= eta:
        return float(to[0]), float(to[1])
    return frm[0] + eta * dx / dist, frm[1] + eta * dy / dist


def near_radius(n: int, gamma: float, eta: float) -> float:
    """``min(gamma * sqrt(log(n) / n), eta)``, with ``eta`` for ``n <= 1``."""
    if n < 1:
        raise ValueError("near radius needs n >= 1")
    if n == 1:
        return eta
    return min(gamma * math.sqrt(math.log(n) / n), eta)


def near(tree: Tree, q_new, n: int, params: PlannerParams) -> list[Node]:
    """Nodes within the shrinking rewiring radius of ``q_new``, by id."""
    gamma = params.gamma if params.gamma is not None else default_gamma(1.0)
    r = near_radius(n, gamma, params.eta)
    ids = np.flatnonzero(tree.sq_dists(q_new) <= r * r)
    return [tree.node(int(i)) for i in ids]


def _subtree_feasible(tree: Tree, root: int, new_root_depth: int, field: ObstacleField) -> bool:
    # checks every edge below ``root`` at the depths it would have after a move
    shift = new_root_depth - tree.depth(root)
    sub = tree.subtree(root)[1:]
    if shift == 0 or not sub:
        return True
    par = [tree._parent[i] for i in sub]
    p = np.column_stack([tree._x[par], tree._y[par]])
    q = np.column_stack([tree._x[sub], tree._y[sub]])
    t = np.array([tree._depth[i] for i in par]) + shift
    return bool(np.all(field.edges_feasible(p, q, t)))


def extend(tree: Tree, q, field: ObstacleField, params: PlannerParams) -> Optional[Node]:
    """One expansion step toward ``q``.

    Returns the new node, or ``None`` when the step is blocked.  For
    ``rrt_star`` the new node is attached to the cheapest feasible neighbour
    and neighbours are then rewired through it where that lowers their
    cost-to-come.
    """
    d2 = tree.sq_dists(q)
    i_nearest = int(d2.argmin())
    p_nearest = tree.position(i_nearest)
    q_new = steer(p_nearest, q, params.eta)
    if q_new == p_nearest:
        return None
    t_nearest = tree._depth[i_nearest]
    if not field.edge_feasible(p_nearest, q_new, t_nearest):
        return None

    kind = params.edge_cost
    cost = tree._cost
    e_nearest = _edge_cost(p_nearest, q_new, kind)
    if params.variant == "rrt":
        i_new = tree._append(q_new[0], q_new[1], i_nearest, e_nearest, cost[i_nearest] + e_nearest, t_nearest + 1)
        return tree.node(i_new)

    gamma = params.gamma if params.gamma is not None else default_gamma(1.0)
    r = near_radius(tree.n, gamma, params.eta)
    if q_new[0] != q[0] or q_new[1] != q[1]:
        d2 = tree.sq_dists(q_new)
    ids = np.flatnonzero(d2 <= r * r)

    # choose parent
    i_min, e_min = i_nearest, e_nearest
    c_min = cost[i_nearest] + e_nearest
    if len(ids):
        px, py = tree._x[ids], tree._y[ids]
        pts = np.column_stack([px, py])
        dx, dy = q_new[0] - px, q_new[1] - py
        e_near = np.sqrt(dx * dx + dy * dy) if kind == "euclidean" else np.ones(len(ids))
        id_list = ids.tolist()
        c_near = np.array([cost[i] for i in id_list]) + e_near
        t_near = 0 if field.is_static else np.array([tree._depth[i] for i in id_list])
        ok = field.edges_feasible(pts, q_new, t_near)
        c_masked = np.where(ok, c_near, np.inf)
        k = int(c_masked.argmin())
        if c_masked[k] < c_min:
            i_min, e_min, c_min = id_list[k], float(e_near[k]), float(c_masked[k])

    i_new = tree._append(q_new[0], q_new[1], i_min, e_min, c_min, tree._depth[i_min] + 1)
    if not len(ids):
        return tree.node(i_new)

    # rewire
    t_new = tree._depth[i_new]
    if not field.is_static:
        ok = field.edges_feasible(q_new, pts, np.full(len(ids), t_new))
    e_list = e_near.tolist()
    for k in np.flatnonzero(ok).tolist():
        j = id_list[k]
        if j == i_min:
            continue
        if c_min + e_list[k] < cost[j]:
            if not field.is_static and not _subtree_feasible(tree, j, t_new + 1, field):
                continue
            tree.reparent(j, i_new, e_list[k])
    return tree.node(i_new)


@dataclass(frozen=True, eq=False)
class PlanResult:
    """Outcome of one planning run.

    ``feasibility_certificates[k]`` re-verifies the edge into node ``k + 1``
    at its assigned time steps.
    """

    positions: np.ndarray
    parents: np.ndarray
    costs: np.ndarray
    depths: np.ndarray
    best_path: Optional[np.ndarray]
    best_node: Optional[int]
    cost: Optional[float]
    objective: Optional[float]
    iterations_used: int
    seed: int
    variant: str
    feasibility_certificates: np.ndarray
    path_verified: Optional[bool]
    status: str = "ok"

    @property
    def found(self) -> bool:
        return self.best_path is not None

    @property
    def num_nodes(self) -> int:
        return len(self.positions)

    @property
    def path_length(self) -> Optional[float]:
        if self.best_path is None:
            return None
        return float(np.sum(np.linalg.norm(np.diff(self.best_path, axis=0), axis=1)))

    def nodes(self) -> list[Node]:
        return [
            Node(i, (float(p[0]), float(p[1])), None if par < 0 else int(par), float(c), int(d))
            for i, (p, par, c, d) in enumerate(zip(self.positions, self.parents, self.costs, self.depths))
        ]

    def to_dict(self) -> dict:
        edges = [[int(p), i] for i, p in enumerate(self.parents) if p >= 0]
        return {
            "status": self.status,
            "variant": self.variant,
            "seed": int(self.seed),
            "iterations_used": int(self.iterations_used),
            "cost": self.cost,
            "objective": self.objective,
            "path_length": self.path_length,
            "best_node": self.best_node,
            "best_path": None if self.best_path is None else self.best_path.tolist(),
            "path_verified": self.path_verified,
            "nodes": [
                {"id": i, "position": [float(p[0]), float(p[1])], "parent": None if par < 0 else int(par),
                 "cost": float(c), "depth": int(d)}
                for i, (p, par, c, d) in enumerate(zip(self.positions, self.parents, self.costs, self.depths))
            ],
            "edges": edges,
            "feasibility_certificates": [bool(b) for b in self.feasibility_certificates],
        }


def verify_path(path, field: ObstacleField, t0: int = 0) -> bool:
    """Re-check every vertex and segment of ``path`` with vertex ``k`` at step ``t0 + k``."""
    path = np.asarray(path, dtype=float)
    for k, x in enumerate(path):
        if not field.point_feasible(x, t0 + k):
            return False
    for k in range(len(path) - 1):
        if not field.edge_feasible(path[k], path[k + 1], t0 + k):
            return False
    return True


def _goal_blocked(goal: GoalRegion, field: ObstacleField) -> bool:
    probes = [goal.center]
    for frac in (1.0, 0.66, 0.33):
        for a in np.linspace(0.0, 2.0 * math.pi, 32, endpoint=False):
            probes.append((goal.center[0] + frac * goal.radius * math.cos(a),
                           goal.center[1] + frac * goal.radius * math.sin(a)))
    # feasibility at the final field state; a dynamic obstacle may uncover the goal later
    t = field.horizon
    return not any(field.point_feasible(p, t) for p in probes)


def _result(tree: Tree, field: ObstacleField, params: PlannerParams, iterations: int,
            goal_ids: Sequence[int], scenario=None, status: str = "ok") -> PlanResult:
    n = tree.n
    positions = tree.positions
    parents = tree.parents
    depths = tree.depths
    if n > 1:
        child = np.arange(1, n)
        par = parents[1:]
        certs = field.edges_feasible(positions[par], positions[child], depths[par])
    else:
        certs = np.zeros(0, dtype=bool)

    best = None
    for i in goal_ids:
        if best is None or tree.cost(i) < tree.cost(best) or (tree.cost(i) == tree.cost(best) and i < best):
            best = i
    best_path = cost = obj = verified = None
    if best is not None:
        best_path = tree.path(best)
        cost = tree.cost(best)
        verified = verify_path(best_path, field)
        penalty = getattr(scenario, "penalty", None)
        obj = objective(best_path, len(best_path) - 1, penalty, field)
    elif status == "ok":
        status = "no_path"
    return PlanResult(
        positions=positions,
        parents=parents,
        costs=tree.costs,
        depths=depths,
        best_path=best_path,
        best_node=best,
        cost=cost,
        objective=obj,
        iterations_used=iterations,
        seed=int(params.seed),
        variant=params.variant,
        feasibility_certificates=certs,
        path_verified=verified,
        status=status,
    )


def plan(scenario: "Scenario", params: PlannerParams | None = None) -> PlanResult:
    """Grow a chance-constrained tree from ``scenario.start``.

    The returned path (if any) is the cheapest tree path ending inside the
    goal region.  Results depend only on ``(scenario, params)``; randomness
    comes from ``numpy.random.default_rng(params.seed)`` (PCG64).
    """
    params = (params or scenario.planner).with_gamma(scenario.workspace.area)
    field = scenario.field
    start = tuple(float(v) for v in scenario.start)
    goal = params.goal
    if not field.point_feasible(start, 0):
        raise InfeasibleStartError(f"start {start} lies inside a risk ellipse")
    if _goal_blocked(goal, field):
        raise GoalBlockedError(f"goal region around {goal.center} is covered by risk ellipses")

    rng = np.random.default_rng(int(params.seed))
    tree = Tree(start, capacity=min(params.max_iterations + 1, 1 << 16))
    goal_ids = [0] if goal.contains(start) else []
    iterations = 0
    for _ in range(params.max_iterations):
        if params.stop_at_goal and goal_ids:
            break
        iterations += 1
        q = sample(scenario.workspace, goal, params, rng)
        node = extend(tree, q, field, params)
        if node is not None and goal.contains(node.position):
            goal_ids.append(node.id)
    logger.debug("plan seed=%d: %d nodes after %d iterations", params.seed, tree.n, iterations)
    return _result(tree, field, params, iterations, goal_ids, scenario)


def _failed_result(start, params: PlannerParams, field: ObstacleField, status: str) -> PlanResult:
    tree = Tree(start, capacity=1)
    return _result(tree, field, params, 0, [], status=status)


def _agent_obstacle(path: np.ndarray, covariance) -> Obstacle:
    base = Gaussian2D(path[0], covariance)
    schedule = {t: path[t] - path[0] for t in range(1, len(path))}
    return Obstacle(base, schedule)


def plan_multiagent(scenarios: Sequence["Scenario"], params: PlannerParams | None = None,
                    agent_covariance=((0.05, 0.0), (0.0, 0.05))) -> list[PlanResult]:
    """Prioritised planning: agent ``j`` treats agents ``0..j-1`` as moving
    Gaussian obstacles that follow their planned paths one edge per step.

    Each agent's budget ``delta`` is re-split over its enlarged obstacle set.
    An agent without a path is frozen at its start as a static obstacle for
    everyone after it.
    """
    results: list[PlanResult] = []
    planned: list[Obstacle] = []
    for j, sc in enumerate(scenarios):
        base = sc.field
        obstacles = list(base.obstacles) + planned
        delta = base.risk.delta
        risk = RiskConfig(delta=delta, num_obstacles=len(obstacles), alpha=delta / len(obstacles)) \
            if obstacles else base.risk
        field = ObstacleField(obstacles, risk)
        agent_sc = dataclasses.replace(sc, field=field)
        agent_params = params if params is not None else sc.planner
        if params is not None:
            agent_params = dataclasses.replace(params, goal=sc.goal)
        try:
            res = plan(agent_sc, agent_params)
        except (InfeasibleStartError, GoalBlockedError) as exc:
            logger.warning("agent %d: %s", j, exc)
            res = _failed_result(sc.start, agent_params, field,
                                 "infeasible_start" if isinstance(exc, InfeasibleStartError) else "goal_blocked")
        results.append(res)
        if res.found:
            planned.append(_agent_obstacle(res.best_path, agent_covariance))
        else:
            planned.append(Obstacle(Gaussian2D(sc.start, agent_covariance)))
    return results
