"""Local grid search over candidate positions (the ``opt`` used by the agents)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoFeasibleCandidate, Untraversable
from .vision import BlurredStandardizer, average
from .world import Position


@dataclass(frozen=True)
class SearchSpec:
    radius: float = 2.0
    step: float = 0.5
    n_avg: int = 3

    def __post_init__(self):
        if not 0 < self.step <= self.radius:
            raise ValueError("need 0 < step <= radius")
        if int(self.n_avg) != self.n_avg or self.n_avg < 1:
            raise ValueError("n_avg must be a positive integer")

    @property
    def half_width(self) -> int:
        return int(np.floor(self.radius / self.step + 1e-9))


def candidates(center, spec: SearchSpec):
    """Grid points ``center + (i*h, j*h)`` with ``|i*h|, |j*h| <= R``, lexicographic in (x, y)."""
    k = spec.half_width
    cx, cy = center
    return [Position(cx + i * spec.step, cy + j * spec.step)
            for i in range(-k, k + 1) for j in range(-k, k + 1)]


def grid_search(center, spec: SearchSpec, objective):
    """Minimise ``objective`` over the local grid.

    ``objective`` may raise :class:`Untraversable` for infeasible candidates.
    Returns ``(best_position, best_value, evals)``; ties go to the
    lexicographically smallest (x, then y) candidate.
    """
    best, best_val, evals = None, np.inf, 0
    for p in candidates(center, spec):
        try:
            val = objective(p)
        except Untraversable:
            continue
        evals += 1
        # candidates arrive in lexicographic order, so strict < keeps the smallest on ties
        if best is None or val < best_val:
            best, best_val = p, val
    if best is None:
        raise NoFeasibleCandidate(f"no traversable candidate around {tuple(center)}")
    return best, float(best_val), evals


def image_objective(world, spec: SearchSpec, target, kern_or_sigma=1.5):
    """Objective ``r -> dist(target, mean of n_avg renders at r)`` using teleportation."""
    standardizer = _standardizer(kern_or_sigma)
    target_t = standardizer.transform(target)

    def objective(p):
        if not world.traversable(p):
            raise Untraversable(f"candidate {tuple(p)} is not traversable")
        world.teleport(p)
        frames = [world.render() for _ in range(spec.n_avg)]
        return float(np.linalg.norm(standardizer.transform(average(frames)) - target_t))

    return objective


def _standardizer(kern_or_sigma):
    st = BlurredStandardizer(getattr(kern_or_sigma, "sigma", kern_or_sigma))
    if hasattr(kern_or_sigma, "taps"):
        st.kernel_ = kern_or_sigma
        return st
    return st.fit()
