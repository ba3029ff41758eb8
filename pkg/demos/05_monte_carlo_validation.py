"""
Monte-Carlo check of the collision budget
=========================================

The union bound promises that, at every step of an accepted path, the
chance of meeting any obstacle's realised position stays below the total
budget.  Here obstacle positions are drawn directly and the per-step
collision frequency is counted.
"""

import numpy as np

from ccrrt import load_scenario, plan
from ccrrt.validation import coverage_check, path_risk_check

scenario = load_scenario("paper_sec5.json")
field = scenario.field

# %%
# First, the ellipses hold the advertised probability mass.

for i, g in enumerate(field.gaussians_at(0)):
    rep = coverage_check(g, field.risk.alpha, 100_000, seed=i)
    print(f"obstacle at {g.mu}: inside fraction {rep.estimate:.4f} +/- {rep.std_error:.4f} (target 0.95)")

# %%
# Then a planned path, step by step.

res = plan(scenario)
rep = path_risk_check(res.best_path, field, 10_000, seed=0)
print(f"worst step {rep.worst_step}: {rep.estimate:.4f} +/- {rep.std_error:.4f} (budget {field.risk.delta})")
print("per-step frequencies:", np.round(rep.per_step, 3))

# %%
# A path straight through an obstacle for contrast.

bad = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
rep = path_risk_check(bad, field, 10_000, seed=0)
print(f"through the obstacle: worst step {rep.worst_step}, frequency {rep.estimate:.3f}")
