"""Monte-Carlo checks of the probabilistic guarantees.

Nothing here reuses the planner's geometry: obstacle positions are sampled
directly and the collision event is evaluated point by point.

Sampling is split into ``chunks``; chunk ``i`` draws from
``numpy.random.default_rng(seed + i)`` and results are merged by summing hit
counts, so a threaded run and a sequential run with the same chunking give
identical reports.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .constraints import ObstacleField
from .probability import Gaussian2D, chi2_inv, mahalanobis_sq

__all__ = ["EVENTS", "MCReport", "chunk_sizes", "coverage_check", "path_risk_check"]

EVENTS = ("contour", "proximity")


@dataclass(frozen=True)
class MCReport:
    samples: int
    hits: int
    estimate: float
    std_error: float
    seed: int
    per_step: Optional[list[float]] = field(default=None, compare=False)
    worst_step: Optional[int] = None

    @classmethod
    def from_counts(cls, hits: int, samples: int, seed: int, **extra) -> "MCReport":
        est = hits / samples
        return cls(samples, int(hits), est, math.sqrt(est * (1.0 - est) / samples), int(seed), **extra)

    def within(self, target: float, sigmas: float = 3.0) -> bool:
        return abs(self.estimate - target) <= sigmas * self.std_error

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["per_step"] is None:
            del d["per_step"]
            del d["worst_step"]
        return d


def chunk_sizes(n: int, chunks: int) -> list[int]:
    chunks = max(1, min(int(chunks), n))
    base, extra = divmod(n, chunks)
    return [base + (i < extra) for i in range(chunks)]


def _run_chunks(fn, n: int, seed: int, chunks: int, workers: Optional[int]):
    jobs = [(seed + i, m) for i, m in enumerate(chunk_sizes(n, chunks))]
    if workers and workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda job: fn(*job), jobs))
    return [fn(s, m) for s, m in jobs]


def coverage_check(g: Gaussian2D, alpha: float, n: int, seed: int = 0, *,
                   chunks: int = 1, workers: Optional[int] = None) -> MCReport:
    """Fraction of draws ``X ~ N(mu, sigma)`` that land in the ``alpha`` risk domain.

    Should approach ``1 - alpha``.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha!r}")
    threshold = chi2_inv(2, 1.0 - alpha)

    def run(chunk_seed, m):
        x = g.sample(np.random.default_rng(chunk_seed), m)
        return int(np.count_nonzero(mahalanobis_sq(g, x) <= threshold))

    hits = sum(_run_chunks(run, n, seed, chunks, workers))
    return MCReport.from_counts(hits, n, seed)


def _collides(event: str, g: Gaussian2D, x_t: np.ndarray, samples: np.ndarray, threshold: float) -> np.ndarray:
    if event == "contour":
        # the realised obstacle sits on a level set at least as wide as the one through x_t
        return mahalanobis_sq(g, samples) >= mahalanobis_sq(g, x_t)
    d = x_t - samples
    s = g.sigma_inv
    q = s[0, 0] * d[:, 0] ** 2 + 2.0 * s[0, 1] * d[:, 0] * d[:, 1] + s[1, 1] * d[:, 1] ** 2
    return q <= threshold


def path_risk_check(path, field: ObstacleField, n: int, seed: int = 0, *, event: str = "contour",
                    t0: int = 0, chunks: int = 1, workers: Optional[int] = None) -> MCReport:
    """Worst per-step empirical collision frequency along ``path``.

    Vertex ``k`` is evaluated at time step ``t0 + k``.  At each step all
    obstacle positions are drawn jointly and a sample counts as a collision
    if any obstacle triggers ``event``:

    ``"contour"``
        ``T_i^2(X_i) >= T_i^2(x_t)``: the sampled obstacle lies on a
        Mahalanobis level set that reaches the vehicle.  Its probability is
        ``1 - F(T_i^2(x_t))``, below ``alpha`` for every feasible ``x_t``.
    ``"proximity"``
        ``(x_t - X_i)^T sigma_i^-1 (x_t - X_i) <= chi2_inv(2, 1 - alpha)``:
        the vehicle falls inside the risk ellipse re-centred on the sample.
    """
    if event not in EVENTS:
        raise ValueError(f"event must be one of {EVENTS}, got {event!r}")
    path = np.atleast_2d(np.asarray(path, dtype=float))
    if path.size == 0:
        raise ValueError("path must contain at least one point")
    if n < 1:
        raise ValueError("need at least one sample per step")
    steps = len(path)
    gaussians = [field.gaussians_at(t0 + k) for k in range(steps)]

    def run(chunk_seed, m):
        rng = np.random.default_rng(chunk_seed)
        hits = np.zeros(steps, dtype=np.int64)
        for k, x_t in enumerate(path):
            hit = np.zeros(m, dtype=bool)
            for g in gaussians[k]:
                hit |= _collides(event, g, x_t, g.sample(rng, m), field.threshold)
            hits[k] = np.count_nonzero(hit)
        return hits

    hits = np.sum(_run_chunks(run, n, seed, chunks, workers), axis=0)
    per_step = (hits / n).tolist()
    worst = int(np.argmax(hits))
    return MCReport.from_counts(int(hits[worst]), n, seed, per_step=per_step, worst_step=worst)
