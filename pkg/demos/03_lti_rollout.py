"""
Discrete-time linear dynamics
=============================

Paths are replayed through ``x[t+1] = A x[t] + B u[t]``.  With a single
integrator each planner edge is one input, so the step at which the
trajectory first enters the goal region is also the path's step count.
"""

import numpy as np

from ccrrt import GoalRegion, LTIModel, objective, rollout, single_integrator
from ccrrt.dynamics import path_inputs

# %%
# A single integrator driven along five unit steps.

model = single_integrator(dt=1.0)
goal = GoalRegion((5.0, 0.0), 0.5)
states, t_goal = rollout(model, [0.0, 0.0], [[1.0, 0.0]] * 8, goal)
print("states:", states[:, 0])
print("first step inside the goal:", t_goal)
print("objective without penalty:", objective(states, t_goal))

# %%
# Replaying a waypoint list reproduces it exactly.

path = np.array([[0, 0], [0.4, 0.3], [0.9, 0.5], [1.2, 1.0]])
states, _ = rollout(model, path[0], path_inputs(path))
print("replay matches:", np.array_equal(states, path))

# %%
# A damped oscillator with four states obeys superposition.

rng = np.random.default_rng(1)
A = np.array([[1.0, 0.1, 0, 0], [-0.1, 0.98, 0, 0], [0, 0, 1.0, 0.1], [0, 0, -0.2, 0.97]])
B = np.array([[0, 0], [0.1, 0], [0, 0], [0, 0.1]])
osc = LTIModel(A, B)
x1, x2 = rng.normal(size=4), rng.normal(size=4)
u1, u2 = rng.normal(size=(20, 2)), rng.normal(size=(20, 2))
s1, _ = rollout(osc, x1, u1)
s2, _ = rollout(osc, x2, u2)
s12, _ = rollout(osc, x1 + x2, u1 + u2)
print("max superposition error:", np.abs(s12 - (s1 + s2)).max())
