"""
Chance-constrained RRT and RRT*
===============================

The bundled scenario has four Gaussian obstacles, start (0, 0) and a goal
disc around (6, 10).  Both planners grow trees whose edges avoid every risk
ellipse.  RRT* additionally picks the cheapest parent and rewires
neighbours, which shortens paths as the tree grows.
"""

import numpy as np

from ccrrt import PlannerParams, load_scenario, plan, verify_path

scenario = load_scenario("paper_sec5.json")
print(f"{len(scenario.field)} obstacles, alpha = {scenario.alpha}, delta = {scenario.delta}")

# %%
# One RRT* run with the scenario's own settings.

res = plan(scenario)
print(f"seed {res.seed}: {res.num_nodes} nodes, path of {len(res.best_path)} vertices, "
      f"length {res.path_length:.3f}, re-verified: {verify_path(res.best_path, scenario.field)}")

# %%
# Path length over a handful of seeds and iteration budgets.

for iters in (1000, 3000, 6000):
    row = []
    for variant in ("rrt", "rrt_star"):
        lengths = [
            plan(scenario, PlannerParams(goal=scenario.goal, seed=s, max_iterations=iters, variant=variant)).path_length
            for s in range(5)
        ]
        lengths = [x for x in lengths if x is not None]
        row.append(f"{variant:8s} median {np.median(lengths):6.3f} ({len(lengths)}/5 found)")
    print(f"{iters:5d} iterations:  " + "   ".join(row))
