"""Deterministic feasibility predicates derived from a collision budget.

The mission budget ``delta`` is split evenly over ``B`` obstacles, so each
obstacle gets risk level ``alpha = delta / B``.  By the union bound a point
outside every obstacle's ``alpha`` risk domain collides with probability at
most ``B * alpha <= delta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .probability import Gaussian2D, chi2_inv

__all__ = [
    "Obstacle",
    "ObstacleField",
    "RiskConfig",
    "Workspace",
    "allocate_risk",
]


@dataclass(frozen=True)
class RiskConfig:
    delta: float
    num_obstacles: int
    alpha: float

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta!r}")
        if self.num_obstacles < 0:
            raise ValueError("num_obstacles must be non-negative")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if self.num_obstacles * self.alpha > self.delta * (1.0 + 1e-12):
            raise ValueError(
                f"risk budget exceeded: {self.num_obstacles} * {self.alpha} > {self.delta}"
            )


def allocate_risk(delta: float, num_obstacles: int) -> RiskConfig:
    """Split ``delta`` evenly: ``alpha = delta / num_obstacles``."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta!r}")
    if num_obstacles < 1:
        raise ValueError("need at least one obstacle to allocate risk")
    return RiskConfig(delta=delta, num_obstacles=num_obstacles, alpha=delta / num_obstacles)


@dataclass(frozen=True)
class Workspace:
    lower: tuple[float, float]
    upper: tuple[float, float]

    def __post_init__(self):
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        if len(lower) != 2 or len(upper) != 2:
            raise ValueError("workspace bounds must be 2-vectors")
        if not (lower[0] < upper[0] and lower[1] < upper[1]):
            raise ValueError(f"workspace lower {lower} must be below upper {upper}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def area(self) -> float:
        return (self.upper[0] - self.lower[0]) * (self.upper[1] - self.lower[1])

    def contains(self, p) -> bool:
        return self.lower[0] <= p[0] <= self.upper[0] and self.lower[1] <= p[1] <= self.upper[1]


@dataclass(frozen=True, eq=False)
class Obstacle:
    """A Gaussian obstacle whose mean may move over discrete time steps.

    ``schedule`` maps a time step to the mean offset in force from that step
    on (piecewise constant); steps before the first key use a zero offset.
    """

    gaussian: Gaussian2D
    schedule: Mapping[int, Sequence[float]] = field(default_factory=dict)

    def __post_init__(self):
        sched = {}
        for t, off in sorted(self.schedule.items()):
            t = int(t)
            if t < 0:
                raise ValueError("schedule time steps must be non-negative")
            off = np.asarray(off, dtype=float)
            if off.shape != (2,) or not np.all(np.isfinite(off)):
                raise ValueError(f"schedule offset at step {t} must be a finite 2-vector")
            sched[t] = off
        object.__setattr__(self, "schedule", sched)

    @property
    def is_static(self) -> bool:
        return all(not np.any(off) for off in self.schedule.values())

    @property
    def horizon(self) -> int:
        """Last time step at which the mean changes."""
        return max(self.schedule, default=0)

    def offset_at(self, t: int) -> np.ndarray:
        off = np.zeros(2)
        for step, value in self.schedule.items():
            if step > t:
                break
            off = value
        return off

    def mean_at(self, t: int) -> np.ndarray:
        return self.gaussian.mu + self.offset_at(t)


class ObstacleField:
    """Obstacles plus the risk allocation that turns them into constraints.

    A point ``x`` is feasible at step ``t`` iff its squared Mahalanobis
    distance to every obstacle (mean taken at ``t``) is strictly above
    ``chi2_inv(2, 1 - alpha)``.
    """

    def __init__(self, obstacles: Sequence[Obstacle | Gaussian2D], risk: RiskConfig):
        obs = tuple(o if isinstance(o, Obstacle) else Obstacle(o) for o in obstacles)
        if risk.num_obstacles != len(obs):
            raise ValueError(
                f"risk.num_obstacles={risk.num_obstacles} but {len(obs)} obstacles given"
            )
        self.obstacles = obs
        self.risk = risk
        self.threshold = chi2_inv(2, 1.0 - risk.alpha)
        self.is_static = all(o.is_static for o in obs)

        b = len(obs)
        self._inv = np.array([o.gaussian.sigma_inv for o in obs]).reshape(b, 2, 2)
        self._a11 = self._inv[:, 0, 0].copy()
        self._a12 = self._inv[:, 0, 1].copy()
        self._a22 = self._inv[:, 1, 1].copy()
        # row t holds all means at step t; steps past the end reuse the last row
        horizon = 0 if self.is_static else max(o.horizon for o in obs)
        self._means = np.array(
            [[o.mean_at(t) for o in obs] for t in range(horizon + 1)]
        ).reshape(horizon + 1, b, 2)
        self._inv_list = [(float(a), float(c), float(d)) for a, c, d in zip(self._a11, self._a12, self._a22)]
        self._means_list = self._means.tolist()
        # whitening W with W^T W = sigma^-1, stacked so that ``p @ self._white``
        # gives [first whitened coordinate per obstacle..., second ...]
        r00 = np.sqrt(self._a11)
        r01 = self._a12 / r00 if b else self._a12
        r11 = np.sqrt(np.maximum(self._a22 - r01 * r01, 0.0))
        self._white = np.zeros((2, 2 * b))
        self._white[0, :b] = r00
        self._white[1, :b] = r01
        self._white[1, b:] = r11
        self._means_white = np.concatenate(
            [r00 * self._means[..., 0] + r01 * self._means[..., 1], r11 * self._means[..., 1]], axis=-1
        )

    @classmethod
    def empty(cls, delta: float = 0.05) -> "ObstacleField":
        return cls((), RiskConfig(delta=delta, num_obstacles=0, alpha=delta))

    def __len__(self) -> int:
        return len(self.obstacles)

    @property
    def horizon(self) -> int:
        return self._means.shape[0] - 1

    def means_at(self, t) -> np.ndarray:
        """Obstacle means at step ``t``; ``(B, 2)``, or ``(k, B, 2)`` for an array of steps."""
        idx = np.minimum(np.asarray(t, dtype=np.int64), self.horizon)
        return self._means[idx]

    def mahalanobis_all(self, x, t: int = 0) -> np.ndarray:
        """Squared Mahalanobis distance from ``x`` to each obstacle at step ``t``."""
        d = np.asarray(x, dtype=float) - self.means_at(t)
        val = self._a11 * d[:, 0] ** 2 + 2.0 * self._a12 * d[:, 0] * d[:, 1] + self._a22 * d[:, 1] ** 2
        return np.maximum(val, 0.0)

    def point_feasible(self, x, t: int = 0) -> bool:
        if not self.obstacles:
            return True
        return bool(np.all(self.mahalanobis_all(x, t) > self.threshold))

    def segment_min(self, p, q, t: int = 0) -> list[float]:
        """Exact minimum over the segment ``p -> q`` of each obstacle's squared
        Mahalanobis distance, with means frozen at step ``t``."""
        px, py = float(p[0]), float(p[1])
        vx, vy = float(q[0]) - px, float(q[1]) - py
        out = []
        rows = self._means_list
        for (a11, a12, a22), (mx, my) in zip(self._inv_list, rows[min(t, len(rows) - 1)]):
            dx, dy = px - mx, py - my
            vsv = a11 * vx * vx + 2.0 * a12 * vx * vy + a22 * vy * vy
            s = 0.0
            if vsv > 0.0:
                s = -(a11 * dx * vx + a12 * (dx * vy + dy * vx) + a22 * dy * vy) / vsv
                s = min(max(s, 0.0), 1.0)
            wx, wy = dx + s * vx, dy + s * vy
            out.append(max(a11 * wx * wx + 2.0 * a12 * wx * wy + a22 * wy * wy, 0.0))
        return out

    def segment_feasible(self, p, q, t: int = 0) -> bool:
        """Whole segment ``p -> q`` clear of every risk domain at step ``t``."""
        thr = self.threshold
        return all(m > thr for m in self.segment_min(p, q, t))

    def edge_feasible(self, p, q, t: int = 0) -> bool:
        """Segment traversed between steps ``t`` and ``t + 1``; it must be clear
        at both steps."""
        if not self.segment_feasible(p, q, t):
            return False
        return self.is_static or self.segment_feasible(p, q, t + 1)

    def segments_min(self, p, q, t=0) -> np.ndarray:
        """Vectorised ``segment_min`` for ``k`` segments, shape ``(k, B)``.

        ``p`` and ``q`` broadcast to ``(k, 2)``; ``t`` is a scalar or ``(k,)``.
        Works in whitened coordinates, where each risk domain is a disc.
        """
        p = np.atleast_2d(np.asarray(p, dtype=float))
        q = np.atleast_2d(np.asarray(q, dtype=float))
        b = len(self.obstacles)
        if self.horizon == 0:
            mw = self._means_white[0]
        else:
            mw = self._means_white[np.minimum(np.asarray(t, dtype=np.int64), self.horizon)]
        d = p @ self._white - mw
        v = (q - p) @ self._white
        d0, d1, v0, v1 = d[..., :b], d[..., b:], v[..., :b], v[..., b:]
        vv = v0 * v0 + v1 * v1
        s = d0 * v0
        s += d1 * v1
        s /= np.maximum(vv, 1e-300)
        np.negative(s, out=s)
        np.maximum(s, 0.0, out=s)
        np.minimum(s, 1.0, out=s)
        w0 = d0 + s * v0
        w1 = d1 + s * v1
        return w0 * w0 + w1 * w1

    def edges_feasible(self, p, q, t=0) -> np.ndarray:
        """Vectorised ``edge_feasible``; returns a boolean array of length ``k``."""
        p = np.atleast_2d(np.asarray(p, dtype=float))
        q = np.atleast_2d(np.asarray(q, dtype=float))
        k = max(len(p), len(q))
        if not self.obstacles:
            return np.ones(k, dtype=bool)
        ok = np.all(self.segments_min(p, q, t) > self.threshold, axis=1)
        if not self.is_static:
            ok &= np.all(self.segments_min(p, q, np.asarray(t) + 1) > self.threshold, axis=1)
        return ok

    def collision_prob_bound(self, x, t: int = 0) -> float:
        """Union-bound certificate: ``B * alpha`` if ``x`` is feasible, else 1."""
        if not self.obstacles:
            return 0.0
        if not self.point_feasible(x, t):
            return 1.0
        return self.risk.num_obstacles * self.risk.alpha

    def gaussians_at(self, t: int = 0) -> list[Gaussian2D]:
        return [o.gaussian.shifted(o.offset_at(t)) for o in self.obstacles]

    def clearance(self, x, t: int = 0) -> float:
        """``min_i (T_i^2(x) - threshold)``; positive when ``x`` is feasible."""
        if not self.obstacles:
            return math.inf
        return float(np.min(self.mahalanobis_all(x, t)) - self.threshold)

