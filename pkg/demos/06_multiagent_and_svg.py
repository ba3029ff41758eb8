"""
Prioritised multi-agent planning and SVG export
===============================================

Agents plan one after another.  Each agent sees the earlier agents as
Gaussian obstacles that move along their planned paths, one edge per time
step, so later agents wait or detour around them.
"""

import dataclasses
from pathlib import Path

from ccrrt import load_scenario, plan_multiagent, render_svg
from ccrrt.dynamics import GoalRegion
from ccrrt.planner import verify_path

base = load_scenario("paper_sec5.json")

# %%
# Two agents crossing the workspace in opposite directions.

goal_b = GoalRegion((0.0, 11.0), 0.5)
agent_a = base
agent_b = dataclasses.replace(base, start=(7.5, 0.0), goal=goal_b,
                              planner=dataclasses.replace(base.planner, goal=goal_b, seed=1))
results = plan_multiagent([agent_a, agent_b])
for name, res in zip("AB", results):
    print(f"agent {name}: status {res.status}, {len(res.best_path)} steps, length {res.path_length:.3f}")

# Agent B's path is still clear of the static obstacles on its own.
print("agent B clear of static obstacles:", verify_path(results[1].best_path, base.field))

# %%
# Drawings of both trees.

out = Path("demo_output")
out.mkdir(exist_ok=True)
for name, sc, res in zip("ab", (agent_a, agent_b), results):
    (out / f"agent_{name}.svg").write_text(render_svg(sc, res))
print("wrote", sorted(p.name for p in out.glob("*.svg")))
