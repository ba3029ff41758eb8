"""Gaussian obstacles, chi-square quantiles and risk ellipses.

A Gaussian obstacle ``N(mu, sigma)`` at risk level ``alpha`` is replaced by
the deterministic region

    {x : (x - mu)^T sigma^-1 (x - mu) <= chi2_inv(d, 1 - alpha)}

which is an ellipse (or circle) in the plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

__all__ = [
    "ChiSquareDist",
    "Gaussian2D",
    "RiskEllipse",
    "chi2_cdf",
    "chi2_inv",
    "mahalanobis_sq",
    "pdf",
    "regularized_gamma_p",
    "risk_ellipse",
    "sym_eig2",
    "sym_sqrt2",
]

# Relative eigenvalue floor for an acceptable covariance.
_COND_FLOOR = 1e-12
_GAMMA_EPS = 1e-15
_GAMMA_MAX_ITER = 10_000


def sym_eig2(a: float, b: float, c: float) -> tuple[float, float, float]:
    """Eigen-decomposition of ``[[a, b], [b, c]]`` in closed form.

    Returns ``(lam_major, lam_minor, angle)`` with ``angle`` the direction of
    the major eigenvector, normalised to ``[-pi/2, pi/2)``.  Equal eigenvalues
    give ``angle = 0``.
    """
    half_tr = 0.5 * (a + c)
    root = math.hypot(0.5 * (a - c), b)
    lam_major = half_tr + root
    # det / lam_major avoids cancellation in half_tr - root
    det = a * c - b * b
    lam_minor = det / lam_major if lam_major != 0.0 else half_tr - root
    lam_minor = min(lam_minor, lam_major)
    # half-angle form stays accurate when b is tiny next to a - c
    angle = 0.5 * math.atan2(2.0 * b, a - c)
    if angle >= 0.5 * math.pi:
        angle -= math.pi
    return lam_major, lam_minor, angle


def sym_sqrt2(sigma: np.ndarray) -> np.ndarray:
    """Symmetric square root of a 2x2 SPD matrix.

    Uses ``sqrt(S) = (S + s I) / t`` with ``s = sqrt(det S)`` and
    ``t = sqrt(tr S + 2 s)``.
    """
    sigma = np.asarray(sigma, dtype=float)
    s = math.sqrt(sigma[0, 0] * sigma[1, 1] - sigma[0, 1] * sigma[1, 0])
    t = math.sqrt(sigma[0, 0] + sigma[1, 1] + 2.0 * s)
    return (sigma + s * np.eye(2)) / t


@dataclass(frozen=True, eq=False)
class Gaussian2D:
    """Bivariate normal obstacle position.

    ``sigma`` is symmetrised on construction if its off-diagonal entries
    differ by rounding noise only; anything larger, or a matrix that is not
    positive definite, raises ``ValueError``.
    """

    mu: np.ndarray
    sigma: np.ndarray
    sigma_inv: np.ndarray = field(init=False, repr=False, compare=False)
    det: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float).reshape(-1)
        sigma = np.array(self.sigma, dtype=float)
        if mu.shape != (2,):
            raise ValueError(f"mu must be a 2-vector, got shape {mu.shape}")
        if sigma.shape == (4,):
            sigma = sigma.reshape(2, 2)
        if sigma.shape != (2, 2):
            raise ValueError(f"sigma must be 2x2, got shape {sigma.shape}")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(sigma))):
            raise ValueError("mu and sigma must be finite")
        scale = max(abs(sigma[0, 0]), abs(sigma[1, 1]), 1.0)
        if abs(sigma[0, 1] - sigma[1, 0]) > 1e-12 * scale:
            raise ValueError(
                f"sigma is not symmetric: sigma12={sigma[0, 1]!r}, sigma21={sigma[1, 0]!r}"
            )
        off = 0.5 * (sigma[0, 1] + sigma[1, 0])
        sigma[0, 1] = sigma[1, 0] = off
        lam_major, lam_minor, _ = sym_eig2(sigma[0, 0], off, sigma[1, 1])
        if not lam_major > 0.0 or lam_minor < _COND_FLOOR * lam_major:
            raise ValueError(
                f"sigma is not positive definite (eigenvalues {lam_major!r}, {lam_minor!r})"
            )
        det = sigma[0, 0] * sigma[1, 1] - off * off
        inv = np.array([[sigma[1, 1], -off], [-off, sigma[0, 0]]]) / det
        mu.setflags(write=False)
        sigma.setflags(write=False)
        inv.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "sigma_inv", inv)
        object.__setattr__(self, "det", float(det))

    def shifted(self, offset) -> "Gaussian2D":
        return Gaussian2D(self.mu + np.asarray(offset, dtype=float), self.sigma)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw ``n`` positions, shape ``(n, 2)``."""
        z = rng.standard_normal((n, 2))
        return z @ sym_sqrt2(self.sigma) + self.mu


def mahalanobis_sq(g: Gaussian2D, x) -> np.ndarray | float:
    """Squared Mahalanobis distance ``(x - mu)^T sigma^-1 (x - mu)``.

    ``x`` may be a single point or an ``(n, 2)`` array of points.
    """
    d = np.asarray(x, dtype=float) - g.mu
    s = g.sigma_inv
    val = s[0, 0] * d[..., 0] ** 2 + 2.0 * s[0, 1] * d[..., 0] * d[..., 1] + s[1, 1] * d[..., 1] ** 2
    # floating noise can push a true zero slightly negative
    val = np.maximum(val, 0.0)
    return float(val) if val.ndim == 0 else val


def pdf(g: Gaussian2D, x) -> np.ndarray | float:
    """Bivariate normal density at ``x`` (point or ``(n, 2)`` array)."""
    norm = 1.0 / (2.0 * math.pi * math.sqrt(g.det))
    val = norm * np.exp(-0.5 * np.asarray(mahalanobis_sq(g, x)))
    return float(val) if np.ndim(val) == 0 else val


@dataclass(frozen=True)
class ChiSquareDist:
    dof: int

    def __post_init__(self):
        if isinstance(self.dof, bool) or int(self.dof) != self.dof or self.dof < 1:
            raise ValueError(f"dof must be a positive integer, got {self.dof!r}")
        object.__setattr__(self, "dof", int(self.dof))

    def cdf(self, x: float) -> float:
        return chi2_cdf(self, x)

    def inv(self, p: float) -> float:
        return chi2_inv(self, p)


DofLike = Union[int, ChiSquareDist]


def _dist(d: DofLike) -> ChiSquareDist:
    return d if isinstance(d, ChiSquareDist) else ChiSquareDist(d)


def _gamma_series(a: float, x: float) -> float:
    # P(a, x) by the power series; converges fast for x < a + 1
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_GAMMA_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _GAMMA_EPS:
            break
    else:
        raise ArithmeticError(f"gamma series did not converge for a={a}, x={x}")
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cf(a: float, x: float) -> float:
    # Q(a, x) by the Legendre continued fraction (modified Lentz)
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_EPS:
            break
    else:
        raise ArithmeticError(f"gamma continued fraction did not converge for a={a}, x={x}")
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def regularized_gamma_p(a: float, x: float) -> float:
    """Regularized lower incomplete gamma function ``P(a, x)``."""
    if a <= 0.0:
        raise ValueError("a must be positive")
    if x < 0.0:
        raise ValueError("x must be non-negative")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < a + 1.0:
        return min(_gamma_series(a, x), 1.0)
    return max(1.0 - _gamma_cf(a, x), 0.0)


def chi2_cdf(d: DofLike, x: float, *, closed_form: bool = True) -> float:
    """Chi-square CDF with ``d`` degrees of freedom.

    For ``d == 2`` this is ``1 - exp(-x/2)``; pass ``closed_form=False`` to
    force the regularized-gamma route instead.
    """
    dist = _dist(d)
    x = float(x)
    if not x >= 0.0:
        raise ValueError(f"chi-square CDF is defined for x >= 0, got {x!r}")
    if dist.dof == 2 and closed_form:
        return -math.expm1(-0.5 * x)
    return regularized_gamma_p(0.5 * dist.dof, 0.5 * x)


def chi2_inv(d: DofLike, p: float) -> float:
    """Inverse chi-square CDF for ``p`` in ``[0, 1)``.

    ``d == 2`` is inverted exactly; other dof use bisection on ``chi2_cdf``.
    """
    dist = _dist(d)
    p = float(p)
    if not 0.0 <= p < 1.0:
        raise ValueError(f"p must lie in [0, 1), got {p!r}")
    if p == 0.0:
        return 0.0
    if dist.dof == 2:
        return -2.0 * math.log1p(-p)
    lo, hi = 0.0, float(dist.dof)
    while chi2_cdf(dist, hi) <= p:
        lo, hi = hi, 2.0 * hi
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if chi2_cdf(dist, mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True, eq=False)
class RiskEllipse:
    """Boundary of a risk domain in geometric form.

    ``semi_axes`` is ``(major, minor)`` and ``rotation`` the angle of the
    major axis in radians.
    """

    center: np.ndarray
    semi_axes: tuple[float, float]
    rotation: float
    threshold: float

    def boundary(self, n: int = 64) -> np.ndarray:
        """``n`` points on the ellipse, counter-clockwise from the major axis."""
        t = 2.0 * math.pi * np.arange(n) / n
        a, b = self.semi_axes
        cr, sr = math.cos(self.rotation), math.sin(self.rotation)
        u, v = a * np.cos(t), b * np.sin(t)
        return np.column_stack([self.center[0] + cr * u - sr * v, self.center[1] + sr * u + cr * v])

    def contains(self, p) -> bool:
        a, b = self.semi_axes
        d = np.asarray(p, dtype=float) - self.center
        if a == 0.0 or b == 0.0:
            return bool(np.all(d == 0.0))
        cr, sr = math.cos(self.rotation), math.sin(self.rotation)
        u = cr * d[0] + sr * d[1]
        v = -sr * d[0] + cr * d[1]
        return (u / a) ** 2 + (v / b) ** 2 <= 1.0


def risk_ellipse(g: Gaussian2D, alpha: float, d: DofLike = 2) -> RiskEllipse:
    """Risk domain of ``g`` at level ``alpha`` as an explicit ellipse."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha!r}")
    threshold = chi2_inv(d, 1.0 - alpha)
    s = g.sigma
    lam_major, lam_minor, angle = sym_eig2(s[0, 0], s[0, 1], s[1, 1])
    axes = (math.sqrt(lam_major * threshold), math.sqrt(lam_minor * threshold))
    return RiskEllipse(center=g.mu.copy(), semi_axes=axes, rotation=angle, threshold=threshold)
