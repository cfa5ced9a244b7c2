"""Stochastic gradient oracles: unbiased feedback with controllable tails.

Every oracle owns its random stream (single consumer).  Independent trials
should derive their streams from ``child_rng(master_seed, *keys)`` so runs
are reproducible bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import as_vector

_FAMILIES = ("gaussian", "student-t", "pareto")


def child_rng(master_seed, *keys):
    """Deterministic generator derived from a master seed and integer keys."""
    entropy = [int(master_seed) & 0xFFFFFFFFFFFFFFFF] + [int(k) & 0xFFFFFFFF for k in keys]
    return np.random.default_rng(np.random.SeedSequence(entropy))


@dataclass(frozen=True)
class NoiseSpec:
    """Per-coordinate i.i.d. additive noise family with a certified bound.

    family: 'gaussian', 'student-t' (param = degrees of freedom > 2), or
    'pareto' (symmetrized Pareto, param = shape > 2).  `scale` multiplies
    every draw.
    """

    family: str = "gaussian"
    scale: float = 1.0
    param: float = 3.0

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown noise family {self.family!r}; use one of {_FAMILIES}")
        if self.scale < 0:
            raise ValueError("scale must be nonnegative")


def certified_sigma(noise, dim):
    """Closed-form bound s with E||noise||_2^2 <= s^2 (exact for these families)."""
    d = int(dim)
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if noise.family == "gaussian":
        return noise.scale * math.sqrt(d)
    if noise.family == "student-t":
        if noise.param <= 2:
            raise ValueError("student-t needs dof > 2 for a finite second moment")
        return noise.scale * math.sqrt(d * noise.param / (noise.param - 2.0))
    if noise.param <= 2:
        raise ValueError("pareto needs shape > 2 for a finite second moment")
    return noise.scale * math.sqrt(d * noise.param / (noise.param - 2.0))


def _draw_noise(rng, noise, size):
    if noise.scale == 0.0:
        return np.zeros(size)
    if noise.family == "gaussian":
        raw = rng.standard_normal(size)
    elif noise.family == "student-t":
        raw = rng.standard_t(noise.param, size=size)
    else:
        # Symmetric classical Pareto: |X| >= 1, E X = 0, E X^2 = a/(a-2).
        magnitude = 1.0 + rng.pareto(noise.param, size=size)
        raw = magnitude * rng.choice((-1.0, 1.0), size=size)
    return noise.scale * raw


class SyntheticOracle:
    """Returns grad R(h) plus i.i.d. per-coordinate noise from a NoiseSpec."""

    def __init__(self, noise, seed=0):
        self.noise = noise
        self.seed = int(seed)
        self._rng = child_rng(seed)

    def sigma(self, dim):
        return certified_sigma(self.noise, dim)

    def query(self, obj, h_bar, t=None):
        h_bar = as_vector(h_bar, dim=obj.dim)
        return obj.gradient(h_bar) + _draw_noise(self._rng, self.noise, h_bar.size)


class EpochExhaustedError(RuntimeError):
    """A non-shuffling mini-batch oracle ran out of batches."""


class MiniBatchOracle:
    """Averages per-example gradients over consecutive batches of a permutation.

    Each epoch visits every example exactly once.  With shuffle=True a fresh
    permutation is drawn at every epoch boundary; with shuffle=False the
    initial order is used for a single epoch and further queries raise.
    """

    def __init__(self, batch_size, seed=0, shuffle=True):
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        self.batch_size = int(batch_size)
        self.shuffle = bool(shuffle)
        self._rng = child_rng(seed)
        self._order = None
        self._pos = 0

    def steps_per_epoch(self, n):
        return -(-n // self.batch_size)

    def _refresh(self, n):
        if self.shuffle:
            self._order = self._rng.permutation(n)
        else:
            if self._order is not None:
                raise EpochExhaustedError(
                    "mini-batch oracle exhausted its epoch with shuffle disabled"
                )
            self._order = np.arange(n)
        self._pos = 0

    def query(self, obj, h_bar, t=None):
        n = obj.n_examples
        if self._order is None or self._pos >= n:
            self._refresh(n)
        idx = self._order[self._pos : self._pos + self.batch_size]
        self._pos += self.batch_size
        return obj.gradient(h_bar, indices=idx)
