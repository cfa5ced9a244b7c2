"""Closed-form evaluation of the concentration and excess-risk envelopes.

All functions are pure: they consume explicit parameters, never run traces,
so audit code has to pair them with measured quantities by hand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class BoundInputs:
    """Problem constants plus the weight/step schedules of one run."""

    diameter: float
    sigma: float
    smoothness: float
    delta: float
    horizon: int
    weights: np.ndarray = field(default=None)
    steps: np.ndarray = field(default=None)
    bregman_diameter: float = None

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if min(self.diameter, self.smoothness) <= 0 or self.sigma < 0:
            raise ValueError("diameter and smoothness must be positive, sigma >= 0")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        weights = self.weights if self.weights is not None else np.ones(self.horizon)
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (self.horizon,) or np.any(weights <= 0):
            raise ValueError("weights must be positive with one entry per step")
        object.__setattr__(self, "weights", weights)
        if self.steps is not None:
            steps = np.asarray(self.steps, dtype=np.float64)
            if steps.shape != (self.horizon,) or np.any(steps <= 0):
                raise ValueError("steps must be positive with one entry per step")
            object.__setattr__(self, "steps", steps)

    @property
    def log_inv_delta(self):
        return math.log(1.0 / self.delta)

    @classmethod
    def constant(cls, diameter, sigma, smoothness, delta, horizon, beta=None,
                 bregman_diameter=None):
        steps = None if beta is None else np.full(int(horizon), float(beta))
        return cls(
            diameter=diameter,
            sigma=sigma,
            smoothness=smoothness,
            delta=delta,
            horizon=int(horizon),
            weights=np.ones(int(horizon)),
            steps=steps,
            bregman_diameter=bregman_diameter,
        )


def q_delta(inputs):
    """Variance-driven deviation envelope (scales with diameter * sigma)."""
    w = inputs.weights
    bracket = (
        w.sum() / math.sqrt(inputs.horizon)
        + math.sqrt(float(w @ w))
        + 2.0 * float(w.max())
    )
    return 2.0 * inputs.diameter * inputs.sigma * math.sqrt(2.0 * inputs.log_inv_delta) * bracket


def r_delta(inputs):
    """Smoothness-driven deviation envelope (scales with smoothness * D^2)."""
    w = inputs.weights
    t = inputs.horizon
    bracket = (
        w.sum() / t
        + math.sqrt(float(w @ w) / t)
        + 2.0 * math.sqrt(2.0) * float(w.max())
    )
    return 2.0 * inputs.smoothness * inputs.diameter ** 2 * inputs.log_inv_delta * bracket


def sgd_excess_bound(inputs):
    """High-probability excess-risk envelope for anytime robust SGD.

    Requires unit weights and constant steps beta <= 1/smoothness; rejects
    inputs outside those hypotheses.
    """
    if not np.all(inputs.weights == 1.0):
        raise ValueError("the SGD envelope assumes unit weights (alpha_t = 1)")
    if inputs.steps is None:
        raise ValueError("the SGD envelope needs the step size beta")
    beta = float(inputs.steps[-1])
    if np.any(inputs.steps != beta):
        raise ValueError("the SGD envelope assumes a constant step size")
    if beta > 1.0 / inputs.smoothness + 1e-12:
        raise ValueError(
            f"step size {beta:g} violates beta <= 1/smoothness = {1.0 / inputs.smoothness:g}"
        )
    t = inputs.horizon
    log_inv = inputs.log_inv_delta
    d = inputs.diameter
    tail = max(
        8.0 * d * inputs.sigma * math.sqrt(2.0 * log_inv / t),
        12.0 * inputs.smoothness * d ** 2 * log_inv / t,
    )
    return 2.0 * d ** 2 / (t * beta) + tail


def euclidean_ball_bregman_diameter(diameter):
    """Bregman diameter constant used for balls under the Euclidean map: 2 D^2."""
    return 2.0 * float(diameter) ** 2


def smd_excess_bound(inputs, strong_convexity=1.0):
    """Excess-risk envelope for anytime robust mirror descent.

    Validates the schedule conditions (nondecreasing weight/step ratio and
    beta_t <= strong_convexity/smoothness) before evaluating.
    """
    if inputs.steps is None:
        raise ValueError("the mirror-descent envelope needs step sizes")
    if inputs.bregman_diameter is None or inputs.bregman_diameter < 0:
        raise ValueError("the mirror-descent envelope needs a nonnegative Bregman diameter")
    from .learners import validate_mirror_schedule

    validate_mirror_schedule(inputs.weights, inputs.steps, strong_convexity, inputs.smoothness)
    lead = float(inputs.weights[-1] / inputs.steps[-1]) * inputs.bregman_diameter
    return (lead + max(q_delta(inputs), r_delta(inputs))) / float(inputs.weights.sum())


@dataclass(frozen=True)
class BernsteinParams:
    """Inputs to the martingale deviation radius."""

    gamma1: float
    gamma2: float
    uniform_bound: float

    def __post_init__(self):
        if min(self.gamma1, self.gamma2, self.uniform_bound) < 0:
            raise ValueError("Bernstein parameters must be nonnegative")


def bernstein_deviation(params):
    """Deviation radius sqrt(2 g1 g2) + (sqrt(2)/3) B g1.

    The maximal partial sum of a martingale difference sequence bounded by B
    exceeds this radius jointly with {variance sum <= g2} with probability at
    most exp(-g1).
    """
    return (
        math.sqrt(2.0 * params.gamma1 * params.gamma2)
        + math.sqrt(2.0) / 3.0 * params.uniform_bound * params.gamma1
    )
