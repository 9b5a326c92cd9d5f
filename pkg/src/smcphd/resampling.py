"""Mass-preserving resampling with a particle-count budget.

The output size tracks the estimated target count (a fixed number of
particles per expected target) and never drops below a configured floor,
so the population cannot die out while the expected count is small.
"""

import math
from dataclasses import dataclass

import numpy as np

from .particles import ParticleSet, round_half_up


@dataclass
class ResampleConfig:
    scheme: str = "systematic"  # systematic | multinomial
    particles_per_target: int = 200
    min_particles: int | None = None  # default ceil(particles_per_target / 2)

    def __post_init__(self):
        if self.scheme not in ("systematic", "multinomial"):
            raise ValueError(f"unknown resampling scheme {self.scheme!r}")
        if self.particles_per_target < 1:
            raise ValueError("particles_per_target must be >= 1")
        if self.min_particles is None:
            self.min_particles = math.ceil(self.particles_per_target / 2)
        if self.min_particles < 1:
            raise ValueError("min_particles must be >= 1")


def target_count(mass: float, config: ResampleConfig) -> int:
    """Particle budget for an expected target count: round(mass) per-target
    blocks, hard-floored at `min_particles`."""
    if mass < 0:
        raise ValueError("mass must be >= 0")
    return max(round_half_up(mass) * config.particles_per_target, config.min_particles)


def systematic_indices(weights: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    """Systematic selection: one uniform offset, `count` equally spaced points
    on the cumulative weight axis.  Copy counts are floor or ceil of the
    expected value; output indices are non-decreasing."""
    w = np.asarray(weights, dtype=float)
    total = w.sum()
    if total <= 0:
        raise ValueError("total weight must be > 0")
    points = (rng.random() + np.arange(count)) / count * total
    return _points_to_indices(w, total, points)


def multinomial_indices(weights: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    """Independent draws proportional to weight."""
    w = np.asarray(weights, dtype=float)
    total = w.sum()
    if total <= 0:
        raise ValueError("total weight must be > 0")
    points = rng.random(count) * total
    return _points_to_indices(w, total, points)


def _points_to_indices(w: np.ndarray, total: float, points: np.ndarray) -> np.ndarray:
    """Invert the cumulative weight function at the given points.

    Points are in [0, total); rounding can push one to exactly `total`, in
    which case it is assigned to the last positive-weight particle so that a
    zero-weight particle can never be selected.
    """
    cum = np.cumsum(w)
    cum[-1] = total  # guard against round-off excluding the last particle
    last_positive = int(np.flatnonzero(w > 0).max())
    return np.minimum(np.searchsorted(cum, points, side="right"), last_positive)


def _equalized_weights(total: float, count: int) -> np.ndarray:
    """`count` near-equal weights whose compensated sum equals `total` exactly.

    Starts from total/count everywhere and folds the residual (a few ulps)
    into the first entry until math.fsum reproduces `total` bit for bit.
    When the exact sum sits on a rounding midpoint a full-step correction
    oscillates between the two neighbours, so the step is halved until it
    makes progress.
    """
    w = np.full(count, total / count)
    diff = total - math.fsum(w.tolist())
    for _ in range(120):
        if diff == 0.0:
            return w
        step = diff
        while True:
            w[0] += step
            new_diff = total - math.fsum(w.tolist())
            if abs(new_diff) < abs(diff):
                diff = new_diff
                break
            w[0] -= step
            step *= 0.5
            if step == 0.0:
                raise ArithmeticError("weight equalization failed to converge")
    raise ArithmeticError("weight equalization failed to converge")


def resample(pset: ParticleSet, config: ResampleConfig, rng: np.random.Generator) -> ParticleSet:
    """Draw a new population proportional to weight and equalize the weights.

    The output has target_count(total mass) particles, total mass preserved
    exactly, and `ancestry` recording each output particle's source index.
    Zero total mass is rejected; the caller is expected to skip resampling
    in that case.
    """
    total = pset.total_weight()
    if total <= 0:
        raise ValueError("cannot resample a particle set with zero total weight")
    count = target_count(total, config)
    if config.scheme == "systematic":
        idx = systematic_indices(pset.weights, count, rng)
    else:
        idx = multinomial_indices(pset.weights, count, rng)
    return ParticleSet(
        states=pset.states[idx].copy(),
        weights=_equalized_weights(total, count),
        step=pset.step,
        survivor_count=count,
        ancestry=idx,
    )
