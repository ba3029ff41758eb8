"""
Risk ellipses from Gaussian obstacles
=====================================

An obstacle whose position is ``N(mu, sigma)`` is avoided by keeping out of
the region where the squared Mahalanobis distance stays below the
``1 - alpha`` chi-square quantile.  In the plane that quantile has the
closed form ``-2 ln(alpha)``.
"""

import math

import numpy as np

from ccrrt import Gaussian2D, chi2_cdf, chi2_inv, mahalanobis_sq, risk_ellipse

# %%
# The quantile used throughout: 2 degrees of freedom, 95 %.

q = chi2_inv(2, 0.95)
print(f"chi2_inv(2, 0.95) = {q:.6f}   (-2 ln 0.05 = {-2 * math.log(0.05):.6f})")

# Other dimensions go through the regularised incomplete gamma function.
for d in (1, 3, 4):
    print(f"  d={d}: chi2_inv = {chi2_inv(d, 0.95):.6f}, cdf back = {chi2_cdf(d, chi2_inv(d, 0.95)):.12f}")

# %%
# One obstacle with a wide, flat covariance.

g = Gaussian2D([1.0, 1.0], [[2 / 3, 0.0], [0.0, 1 / 6]])
for alpha in (0.2, 0.05, 0.01):
    ell = risk_ellipse(g, alpha)
    a, b = ell.semi_axes
    print(f"alpha={alpha:<5} semi-axes {a:.4f} x {b:.4f}, rotation {ell.rotation:+.3f} rad")

# %%
# Points on the boundary all sit on the threshold level set.

ell = risk_ellipse(g, 0.05)
rim = ell.boundary(16)
print("T^2 on the rim:", np.round(mahalanobis_sq(g, rim), 9))

# %%
# A tilted obstacle: the major axis follows the leading eigenvector.

tilted = Gaussian2D([0.0, 0.0], [[1.0, 0.6], [0.6, 0.5]])
ell = risk_ellipse(tilted, 0.05)
print(f"tilted: semi-axes {ell.semi_axes[0]:.4f} x {ell.semi_axes[1]:.4f}, "
      f"rotation {math.degrees(ell.rotation):.2f} deg")
print("contains origin:", ell.contains([0, 0]), " contains (3, 0):", ell.contains([3, 0]))
