"""Discrete-time LTI model, goal regions and the minimum-time objective.

The planner itself is geometric; this module maps a waypoint path onto a
single-integrator input sequence so the plan can be replayed through
``x[t+1] = A x[t] + B u[t]`` and scored as ``J = t_goal + sum(phi(x_t))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "ConstraintViolation",
    "GoalRegion",
    "InputConstraint",
    "LTIModel",
    "Penalty",
    "lti_step",
    "objective",
    "path_inputs",
    "rollout",
    "single_integrator",
]


class ConstraintViolation(ValueError):
    """An input left its admissible box."""


@dataclass(frozen=True)
class GoalRegion:
    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        center = tuple(float(v) for v in self.center)
        if len(center) != 2:
            raise ValueError("goal center must be a 2-vector")
        if not self.radius > 0.0:
            raise ValueError(f"goal radius must be positive, got {self.radius!r}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))

    def contains(self, p) -> bool:
        return math.hypot(p[0] - self.center[0], p[1] - self.center[1]) <= self.radius


@dataclass(frozen=True, eq=False)
class InputConstraint:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float).reshape(-1)
        upper = np.asarray(self.upper, dtype=float).reshape(-1)
        if lower.shape != upper.shape:
            raise ValueError("input bounds must have equal length")
        if np.any(lower > upper):
            raise ValueError("input lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    def check(self, u: np.ndarray, tol: float = 1e-12) -> None:
        if u.shape != self.lower.shape:
            raise ValueError(f"input has shape {u.shape}, constraint expects {self.lower.shape}")
        if np.any(u < self.lower - tol) or np.any(u > self.upper + tol):
            raise ConstraintViolation(f"input {u.tolist()} outside [{self.lower.tolist()}, {self.upper.tolist()}]")


@dataclass(frozen=True, eq=False)
class LTIModel:
    A: np.ndarray
    B_in: np.ndarray
    C: Optional[np.ndarray] = None
    input_constraint: Optional[InputConstraint] = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_2d(np.asarray(self.B_in, dtype=float))
        C = np.eye(A.shape[0]) if self.C is None else np.atleast_2d(np.asarray(self.C, dtype=float))
        nx = A.shape[0]
        if A.shape != (nx, nx):
            raise ValueError(f"A must be square, got {A.shape}")
        if B.shape[0] != nx:
            raise ValueError(f"B_in has {B.shape[0]} rows, expected {nx}")
        if C.shape[1] != nx:
            raise ValueError(f"C has {C.shape[1]} columns, expected {nx}")
        if self.input_constraint is not None and self.input_constraint.lower.shape != (B.shape[1],):
            raise ValueError("input constraint dimension does not match B_in")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B_in", B)
        object.__setattr__(self, "C", C)

    @property
    def nx(self) -> int:
        return self.A.shape[0]

    @property
    def nu(self) -> int:
        return self.B_in.shape[1]


def single_integrator(dt: float = 1.0, max_step: float | None = None) -> LTIModel:
    """Planar ``x[t+1] = x[t] + dt * u[t]``, optionally with ``|u_i| <= max_step``."""
    box = None
    if max_step is not None:
        box = InputConstraint(-np.full(2, max_step), np.full(2, max_step))
    return LTIModel(np.eye(2), dt * np.eye(2), np.eye(2), box)


def lti_step(m: LTIModel, x, u) -> tuple[np.ndarray, np.ndarray]:
    """One step; returns ``(A x + B u, C x)``."""
    x = np.asarray(x, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float).reshape(-1)
    if x.shape != (m.nx,):
        raise ValueError(f"state has dimension {x.size}, model expects {m.nx}")
    if u.shape != (m.nu,):
        raise ValueError(f"input has dimension {u.size}, model expects {m.nu}")
    if m.input_constraint is not None:
        m.input_constraint.check(u)
    return m.A @ x + m.B_in @ u, m.C @ x


def rollout(m: LTIModel, x0, inputs: Sequence, goal: GoalRegion | None = None):
    """Apply ``inputs`` from ``x0``.

    Returns ``(states, t_goal)`` where ``states`` has ``len(inputs) + 1`` rows
    and ``t_goal`` is the first index whose first two state components lie in
    ``goal`` (``None`` if never, or if no goal is given).
    """
    x = np.asarray(x0, dtype=float).reshape(-1)
    if x.shape != (m.nx,):
        raise ValueError(f"x0 has dimension {x.size}, model expects {m.nx}")
    states = [x]
    for u in inputs:
        x, _ = lti_step(m, x, u)
        states.append(x)
    states = np.array(states)
    t_goal = None
    if goal is not None:
        for t, s in enumerate(states):
            if goal.contains(s[:2]):
                t_goal = t
                break
    return states, t_goal


def path_inputs(path, dt: float = 1.0) -> np.ndarray:
    """Single-integrator inputs ``(x[t+1] - x[t]) / dt`` replaying a waypoint path."""
    path = np.asarray(path, dtype=float)
    return np.diff(path, axis=0) / dt


@dataclass(frozen=True)
class Penalty:
    """Per-step penalty ``phi``.

    ``kind="none"`` is ``phi = 0``.  ``kind="clearance"`` is
    ``weight * max(0, margin - m(x))`` with ``m(x)`` the smallest
    Mahalanobis excess over the risk threshold among all obstacles.
    """

    kind: str = "none"
    weight: float = 0.0
    margin: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "clearance"):
            raise ValueError(f"unknown penalty kind {self.kind!r}")
        if self.weight < 0.0:
            raise ValueError("penalty weight must be non-negative")

    def phi(self, x, field=None, t: int = 0) -> float:
        if self.kind == "none" or self.weight == 0.0 or field is None or len(field) == 0:
            return 0.0
        return self.weight * max(0.0, self.margin - field.clearance(x, t))


def objective(states, t_goal: int, penalty: Penalty | None = None, field=None) -> float:
    """``J = t_goal + sum_{t=0}^{t_goal} phi(x_t)``."""
    states = np.asarray(states, dtype=float)
    if t_goal is None or t_goal < 0 or t_goal > len(states):
        raise ValueError(f"t_goal={t_goal!r} is not a valid index into {len(states)} states")
    penalty = penalty or Penalty()
    total = float(t_goal)
    for t in range(min(t_goal + 1, len(states))):
        total += penalty.phi(states[t][:2], field, t)
    return total
