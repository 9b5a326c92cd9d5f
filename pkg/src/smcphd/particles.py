"""Weighted particle populations representing a multi-target intensity.

The sum of the weights approximates the expected number of targets, so
weights are non-negative but do not sum to one.
"""

import math
from dataclasses import dataclass

import numpy as np

from .models import STATE_DIM


def round_half_up(value: float) -> int:
    """Round to nearest integer, ties away from zero toward +inf (2.5 -> 3)."""
    if value < 0:
        raise ValueError("round_half_up expects a non-negative value")
    return int(math.floor(value + 0.5))


@dataclass
class ParticleSet:
    """States (n, 4), weights (n,), and bookkeeping for one time step.

    `survivor_count` is the number of leading particles that originate from
    the previous population (the remainder are birth particles).  `ancestry`
    holds, for a freshly resampled set, the index of each particle's source
    in the pre-resampling population; None otherwise.
    """

    states: np.ndarray
    weights: np.ndarray
    step: int = 0
    survivor_count: int = 0
    ancestry: np.ndarray | None = None

    def __post_init__(self):
        self.states = np.atleast_2d(np.asarray(self.states, dtype=float))
        self.weights = np.asarray(self.weights, dtype=float).ravel()
        if self.states.size == 0:
            self.states = self.states.reshape(0, STATE_DIM)
        if self.states.shape[1] != STATE_DIM:
            raise ValueError(f"states must be (n, {STATE_DIM})")
        if self.weights.shape[0] != self.states.shape[0]:
            raise ValueError("weights length must match number of states")
        if not np.all(np.isfinite(self.states)):
            raise ValueError("particle states must be finite")
        if not np.all(np.isfinite(self.weights)) or np.any(self.weights < 0):
            raise ValueError("particle weights must be finite and >= 0")
        if not 0 <= self.survivor_count <= len(self.weights):
            raise ValueError("survivor_count out of range")
        if self.ancestry is not None:
            self.ancestry = np.asarray(self.ancestry, dtype=np.intp).ravel()
            if self.ancestry.shape[0] != self.weights.shape[0]:
                raise ValueError("ancestry length must match number of particles")

    def __len__(self) -> int:
        return self.states.shape[0]

    def total_weight(self) -> float:
        """Exact (compensated) sum of the weights."""
        return math.fsum(self.weights.tolist())

    def positions(self) -> np.ndarray:
        return self.states[:, [0, 2]]


def empty_set(step: int = 0) -> ParticleSet:
    return ParticleSet(
        states=np.empty((0, STATE_DIM)), weights=np.empty(0), step=step, survivor_count=0
    )


def write_particles(pset: ParticleSet, fileobj) -> None:
    """Column-oriented debug dump: step px vx py vy weight, one particle per line."""
    for state, w in zip(pset.states, pset.weights):
        fileobj.write(
            f"{pset.step} {state[0]:.17g} {state[1]:.17g} "
            f"{state[2]:.17g} {state[3]:.17g} {w:.17g}\n"
        )


def read_particles(fileobj) -> ParticleSet:
    """Read a dump produced by `write_particles` (single step per file)."""
    states, weights, steps = [], [], []
    for line in fileobj:
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 6:
            raise ValueError(f"malformed particle line: {line!r}")
        steps.append(int(parts[0]))
        states.append([float(v) for v in parts[1:5]])
        weights.append(float(parts[5]))
    if steps and len(set(steps)) != 1:
        raise ValueError("particle dump mixes time steps")
    if not steps:
        return empty_set()
    return ParticleSet(states=np.array(states), weights=np.array(weights), step=steps[0])
