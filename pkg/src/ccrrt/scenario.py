"""Scenario files and JSON output.

Scenario schema (UTF-8 JSON)::

    {
      "workspace": {"lower": [x, y], "upper": [x, y]},
      "obstacles": [{"mean": [x, y], "covariance": [s11, s12, s21, s22],
                     "schedule": {"<step>": [dx, dy], ...}}],
      "risk": {"delta": D} | {"alpha": A},
      "start": [x, y],
      "goal": {"center": [x, y], "radius": r},
      "planner": {"eta", "gamma", "max_iterations", "goal_bias",
                  "variant", "edge_cost", "seed"},            # all optional
      "penalty": {"kind": "none" | "clearance", "weight", "margin"}  # optional
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .constraints import Obstacle, ObstacleField, RiskConfig, Workspace, allocate_risk
from .dynamics import GoalRegion, Penalty
from .planner import EDGE_COSTS, VARIANTS, PlannerParams
from .probability import Gaussian2D

__all__ = [
    "Scenario",
    "ScenarioError",
    "ScenarioParseError",
    "ScenarioSchemaError",
    "ScenarioValueError",
    "bundled_scenario",
    "dumps",
    "load_scenario",
    "parse_scenario",
]


class ScenarioError(ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class ScenarioParseError(ScenarioError):
    """File is not valid JSON."""


class ScenarioSchemaError(ScenarioError):
    """Missing/unknown key or wrong value type."""


class ScenarioValueError(ScenarioError):
    """Well-typed value that breaks an invariant."""


@dataclass(frozen=True, eq=False)
class Scenario:
    workspace: Workspace
    field: ObstacleField
    start: tuple[float, float]
    goal: GoalRegion
    planner: PlannerParams
    penalty: Penalty = field(default_factory=Penalty)
    risk_source: str = "delta"

    @property
    def alpha(self) -> float:
        return self.field.risk.alpha

    @property
    def delta(self) -> float:
        return self.field.risk.delta


_TOP_KEYS = {"workspace", "obstacles", "risk", "start", "goal", "planner", "penalty", "name", "description"}
_PLANNER_KEYS = {"eta", "gamma", "max_iterations", "goal_bias", "variant", "edge_cost", "seed"}


def _expect_obj(v, path, keys=None, required=()):
    if not isinstance(v, dict):
        raise ScenarioSchemaError(path, f"expected an object, got {type(v).__name__}")
    if keys is not None:
        extra = sorted(set(v) - set(keys))
        if extra:
            raise ScenarioSchemaError(f"{path}.{extra[0]}", "unknown key")
    for k in required:
        if k not in v:
            raise ScenarioSchemaError(f"{path}.{k}", "missing required key")
    return v


def _number(v, path) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioSchemaError(path, f"expected a number, got {json.dumps(v)}")
    if not math.isfinite(v):
        raise ScenarioValueError(path, "must be finite")
    return float(v)


def _integer(v, path) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ScenarioSchemaError(path, f"expected an integer, got {json.dumps(v)}")
    return v


def _vector(v, path, n=2) -> tuple[float, ...]:
    if not isinstance(v, list) or len(v) != n:
        raise ScenarioSchemaError(path, f"expected an array of {n} numbers")
    return tuple(_number(x, f"{path}[{i}]") for i, x in enumerate(v))


def _obstacle(v, path) -> Obstacle:
    _expect_obj(v, path, {"mean", "covariance", "schedule"}, ("mean", "covariance"))
    mean = _vector(v["mean"], f"{path}.mean")
    cov = _vector(v["covariance"], f"{path}.covariance", 4)
    if cov[1] != cov[2]:
        raise ScenarioValueError(f"{path}.covariance", f"not symmetric: s12={cov[1]!r}, s21={cov[2]!r}")
    try:
        g = Gaussian2D(mean, np.reshape(cov, (2, 2)))
    except ValueError as exc:
        raise ScenarioValueError(f"{path}.covariance", str(exc)) from None
    schedule = {}
    if "schedule" in v:
        sched = _expect_obj(v["schedule"], f"{path}.schedule")
        for key, off in sched.items():
            try:
                step = int(key)
            except ValueError:
                raise ScenarioSchemaError(f"{path}.schedule.{key}", "time step keys must be integers") from None
            if step < 0:
                raise ScenarioValueError(f"{path}.schedule.{key}", "time step must be non-negative")
            schedule[step] = _vector(off, f"{path}.schedule.{key}")
    return Obstacle(g, schedule)


def parse_scenario(data: dict) -> Scenario:
    """Validate a decoded scenario document."""
    _expect_obj(data, "$", _TOP_KEYS, ("workspace", "obstacles", "risk", "start", "goal"))

    ws = _expect_obj(data["workspace"], "workspace", {"lower", "upper"}, ("lower", "upper"))
    lower = _vector(ws["lower"], "workspace.lower")
    upper = _vector(ws["upper"], "workspace.upper")
    try:
        workspace = Workspace(lower, upper)
    except ValueError as exc:
        raise ScenarioValueError("workspace", str(exc)) from None

    if not isinstance(data["obstacles"], list):
        raise ScenarioSchemaError("obstacles", "expected an array")
    obstacles = [_obstacle(o, f"obstacles[{i}]") for i, o in enumerate(data["obstacles"])]
    b = len(obstacles)

    risk_doc = _expect_obj(data["risk"], "risk", {"delta", "alpha"})
    if ("delta" in risk_doc) == ("alpha" in risk_doc):
        raise ScenarioSchemaError("risk", "exactly one of 'delta' or 'alpha' is required")
    if "delta" in risk_doc:
        source = "delta"
        delta = _number(risk_doc["delta"], "risk.delta")
        if not 0.0 < delta < 1.0:
            raise ScenarioValueError("risk.delta", f"must lie in the open interval (0, 1), got {delta!r}")
        risk = allocate_risk(delta, b) if b else RiskConfig(delta, 0, delta)
    else:
        source = "alpha"
        alpha = _number(risk_doc["alpha"], "risk.alpha")
        if not 0.0 < alpha < 1.0:
            raise ScenarioValueError("risk.alpha", f"must lie in the open interval (0, 1), got {alpha!r}")
        delta = b * alpha if b else alpha
        if not delta < 1.0:
            raise ScenarioValueError("risk.alpha", f"implied budget {b} * {alpha} = {delta} is not below 1")
        risk = RiskConfig(delta, b, alpha)
    field_ = ObstacleField(obstacles, risk)

    start = _vector(data["start"], "start")
    if not workspace.contains(start):
        raise ScenarioValueError("start", f"{start} lies outside the workspace")

    goal_doc = _expect_obj(data["goal"], "goal", {"center", "radius"}, ("center", "radius"))
    center = _vector(goal_doc["center"], "goal.center")
    radius = _number(goal_doc["radius"], "goal.radius")
    if not radius > 0.0:
        raise ScenarioValueError("goal.radius", "must be positive")
    if not workspace.contains(center):
        raise ScenarioValueError("goal.center", f"{center} lies outside the workspace")
    goal = GoalRegion(center, radius)

    kw = {}
    if "planner" in data:
        p = _expect_obj(data["planner"], "planner", _PLANNER_KEYS)
        for key in ("eta", "gamma", "goal_bias"):
            if key in p:
                kw[key] = _number(p[key], f"planner.{key}")
        for key in ("max_iterations", "seed"):
            if key in p:
                kw[key] = _integer(p[key], f"planner.{key}")
        if "variant" in p and p["variant"] not in VARIANTS:
            raise ScenarioValueError("planner.variant", f"must be one of {VARIANTS}")
        if "edge_cost" in p and p["edge_cost"] not in EDGE_COSTS:
            raise ScenarioValueError("planner.edge_cost", f"must be one of {EDGE_COSTS}")
        kw.update({k: p[k] for k in ("variant", "edge_cost") if k in p})
    try:
        params = PlannerParams(goal=goal, **kw)
    except ValueError as exc:
        raise ScenarioValueError("planner", str(exc)) from None

    penalty = Penalty()
    if "penalty" in data:
        pen = _expect_obj(data["penalty"], "penalty", {"kind", "weight", "margin"}, ("kind",))
        try:
            penalty = Penalty(
                kind=pen["kind"],
                weight=_number(pen.get("weight", 0.0), "penalty.weight"),
                margin=_number(pen.get("margin", 0.0), "penalty.margin"),
            )
        except ScenarioError:
            raise
        except ValueError as exc:
            raise ScenarioValueError("penalty", str(exc)) from None

    return Scenario(workspace, field_, start, goal, params, penalty, source)


def bundled_scenario(name: str) -> Path:
    """Path of a scenario file shipped with the package."""
    base = resources.files("ccrrt") / "scenarios"
    return Path(str(base / name))


def load_scenario(path) -> Scenario:
    """Load and validate a scenario file.

    A bare file name that does not exist on disk is looked up among the
    bundled scenarios.
    """
    p = Path(path)
    if not p.exists() and p.parent == Path(".") and bundled_scenario(p.name).exists():
        p = bundled_scenario(p.name)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioParseError("", f"cannot read {p}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError("", f"{p}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_scenario(data)


def _encode(obj, indent, level) -> str:
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError(f"cannot serialise non-finite number {x!r}")
        s = format(x, ".17g")
        if "." not in s and "e" not in s and "n" not in s:
            s += ".0"
        return s
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    sep = "," + pad if indent else ","
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = (json.dumps(str(k)) + ": " + _encode(v, indent, level + 1) for k, v in obj.items())
        return "{" + pad + sep.join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        # numeric leaf arrays stay on one line
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_encode(v, 0, 0) for v in obj) + "]"
        return "[" + pad + sep.join(_encode(v, indent, level + 1) for v in obj) + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int = 1) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _encode(obj, indent, 0) + "\n"
