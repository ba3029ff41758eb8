"""
Point and segment feasibility
=============================

A tree edge is only accepted if the whole segment stays outside every risk
ellipse.  Along a segment the squared Mahalanobis distance is a quadratic in
the segment parameter, so its minimum is found exactly.  Here we compare the
closed form with brute-force sampling.
"""

import numpy as np

from ccrrt import Gaussian2D, ObstacleField, allocate_risk

means = [(1, 1), (1, 5), (6, 1), (6, 8.8)]
sigma = [[2 / 3, 0.0], [0.0, 1 / 6]]

# total budget 0.2 spread evenly over four obstacles
risk = allocate_risk(0.2, 4)
field = ObstacleField([Gaussian2D(m, sigma) for m in means], risk)
print(f"alpha per obstacle = {risk.alpha}, threshold = {field.threshold:.6f}")

# %%
# Both endpoints are clear, yet the segment cuts through the first ellipse.

p, q = (-1.5, 0.2), (3.5, 1.8)
print("endpoints feasible:", field.point_feasible(p), field.point_feasible(q))
print("segment feasible:  ", field.segment_feasible(p, q))
print("minimum T^2 per obstacle:", np.round(field.segment_min(p, q), 4))

# %%
# Brute force over 10 000 points agrees with the closed form.

s = np.linspace(0, 1, 10_000)[:, None]
pts = np.asarray(p) + s * (np.subtract(q, p))
brute = []
for g in field.gaussians_at(0):
    d = pts - g.mu
    brute.append(np.einsum("ij,jk,ik->i", d, g.sigma_inv, d).min())
print("brute-force minimum:     ", np.round(brute, 4))

# %%
# Many segments at once, as the planner does during rewiring.

rng = np.random.default_rng(0)
a = rng.uniform(-2, 9, (2000, 2))
b = a + rng.normal(scale=0.6, size=(2000, 2))
ok = field.edges_feasible(a, b, 0)
print(f"{ok.mean():.1%} of 2000 short random edges are feasible")
