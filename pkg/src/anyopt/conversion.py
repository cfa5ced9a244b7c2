"""Anytime weighting, the robust online-to-batch driver, and its audits.

The driver keeps two sequences: ancillary iterates h_t produced by the online
learner and main iterates h_bar_t, their weighted running average.  Gradients
are queried at the main iterates, clipped toward the dual anchor, and only
then fed to the learner.  A completed trace is immutable and carries enough
to recompute every identity and regret quantity after the fact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import as_vector
from .robust import TruncationStats, process


@dataclass
class AnytimeState:
    """Rolling state of the weighted averaging scheme."""

    h: np.ndarray
    h_bar: np.ndarray
    weight_sum: float
    t: int

    @classmethod
    def initial(cls, h_start, alpha_first):
        h_start = as_vector(h_start)
        if not alpha_first > 0:
            raise ValueError("weights must be positive")
        return cls(h=h_start, h_bar=h_start, weight_sum=float(alpha_first), t=1)


def weighting_update(state, h_next, alpha_next):
    """Advance the weighted running average by one iterate; returns h_bar.

    Incremental form of sum_i alpha_i h_i / alpha_{1:t}; agrees with the
    direct weighted average to rounding error.
    """
    if not alpha_next > 0:
        raise ValueError("weights must be positive")
    h_next = as_vector(h_next, dim=state.h_bar.size)
    new_sum = state.weight_sum + alpha_next
    state.h_bar = state.h_bar + (alpha_next / new_sum) * (h_next - state.h_bar)
    state.h = h_next
    state.weight_sum = new_sum
    state.t += 1
    return state.h_bar


TRACE_SCHEMA_VERSION = "run-trace/1"


@dataclass(frozen=True)
class RunTrace:
    """Complete record of one driver run.

    Arrays hold one row per step t = 1..T: the iterate pair before the t-th
    query, the raw and processed gradients of that query, the threshold, the
    truncation flag, and the learner step size (NaN when the learner has
    none).  The final query is taken at h_bar_T but never fed to the learner,
    so processed gradients exist at every step while ancillary updates stop
    at h_T.
    """

    ancillary: np.ndarray
    main: np.ndarray
    weights: np.ndarray
    grads_raw: np.ndarray
    grads_processed: np.ndarray
    thresholds: np.ndarray
    truncated: np.ndarray
    step_sizes: np.ndarray

    @property
    def horizon(self):
        return self.ancillary.shape[0]

    @property
    def dim(self):
        return self.ancillary.shape[1]

    @property
    def final_main(self):
        return self.main[-1]

    @property
    def weight_sums(self):
        return np.cumsum(self.weights)

    def truncation_stats(self):
        stats = TruncationStats()
        for flag in self.truncated:
            stats.record(bool(flag))
        return stats

    def to_dict(self):
        return {
            "schema": TRACE_SCHEMA_VERSION,
            "horizon": int(self.horizon),
            "dim": int(self.dim),
            "ancillary": self.ancillary.tolist(),
            "main": self.main.tolist(),
            "weights": self.weights.tolist(),
            "grads_raw": self.grads_raw.tolist(),
            "grads_processed": self.grads_processed.tolist(),
            "thresholds": self.thresholds.tolist(),
            "truncated": [bool(x) for x in self.truncated],
            # learners without a step size record null, keeping the JSON strict
            "step_sizes": [None if np.isnan(b) else float(b) for b in self.step_sizes],
        }

    @classmethod
    def from_dict(cls, payload):
        if payload.get("schema") != TRACE_SCHEMA_VERSION:
            raise ValueError(f"unsupported trace schema {payload.get('schema')!r}")
        return cls(
            ancillary=np.asarray(payload["ancillary"], dtype=np.float64),
            main=np.asarray(payload["main"], dtype=np.float64),
            weights=np.asarray(payload["weights"], dtype=np.float64),
            grads_raw=np.asarray(payload["grads_raw"], dtype=np.float64),
            grads_processed=np.asarray(payload["grads_processed"], dtype=np.float64),
            thresholds=np.asarray(payload["thresholds"], dtype=np.float64),
            truncated=np.asarray(payload["truncated"], dtype=bool),
            step_sizes=np.array(
                [np.nan if b is None else float(b) for b in payload["step_sizes"]]
            ),
        )


def run(obj, oracle, anchor, schedule, learner, weights, horizon, norm_kind="l2"):
    """Drive the full query -> clip -> learner -> average loop for T steps.

    The learner is updated T-1 times (the T-th processed gradient is recorded
    for audits but produces no ancillary update).  Deterministic given the
    oracle seed.
    """
    horizon = int(horizon)
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (horizon,):
        raise ValueError(f"need {horizon} weights, got shape {weights.shape}")
    if np.any(weights <= 0):
        raise ValueError("weights must be positive")

    h = as_vector(learner.start(), dim=obj.dim)
    if obj.feasible_set is not None and not obj.feasible_set.contains(h, tol=1e-9):
        raise ValueError("initial point lies outside the feasible set")
    state = AnytimeState.initial(h, weights[0])

    dim = h.size
    ancillary = np.empty((horizon, dim))
    main = np.empty((horizon, dim))
    grads_raw = np.empty((horizon, dim))
    grads_proc = np.empty((horizon, dim))
    thresholds = np.empty(horizon)
    truncated = np.zeros(horizon, dtype=bool)
    step_sizes = np.full(horizon, np.nan)

    for t in range(1, horizon + 1):
        i = t - 1
        ancillary[i] = state.h
        main[i] = state.h_bar

        g_raw = oracle.query(obj, state.h_bar, t)
        c_t = schedule.threshold_at(state.h_bar, anchor)
        g_bar, flag = process(g_raw, anchor, c_t, norm_kind=norm_kind)
        grads_raw[i] = g_raw
        grads_proc[i] = g_bar
        thresholds[i] = c_t
        truncated[i] = flag
        step_sizes[i] = learner.beta_at(t)

        if t == horizon:
            break
        h_next = as_vector(learner.step(t, weights[i], weights[i + 1], g_bar), dim=dim)
        weighting_update(state, h_next, weights[i + 1])

    return RunTrace(
        ancillary=ancillary,
        main=main,
        weights=weights.copy(),
        grads_raw=grads_raw,
        grads_processed=grads_proc,
        thresholds=thresholds,
        truncated=truncated,
        step_sizes=step_sizes,
    )


def regret(trace, h_star):
    """Weighted linear regret sum_t alpha_t <g_bar_t, h_t - h_star>."""
    h_star = as_vector(h_star, dim=trace.dim)
    gaps = trace.ancillary - h_star
    return float(np.sum(trace.weights * np.einsum("td,td->t", trace.grads_processed, gaps)))


@dataclass(frozen=True)
class AnytimeAudit:
    """Both sides of the averaging identity plus its regret decomposition."""

    lhs: float
    rhs: float
    regret: float
    gradient_error_sum: float
    bregman_sum: float
    weight_total: float

    @property
    def identity_gap(self):
        return abs(self.lhs - self.rhs)

    @property
    def decomposition_gap(self):
        recomposed = (self.regret + self.gradient_error_sum - self.bregman_sum) / self.weight_total
        return abs(self.lhs - recomposed)


def anytime_identity_audit(trace, obj, h_star):
    """Evaluate the excess-error identity at the trace horizon.

    LHS is R(h_bar_T) - R(h_star); RHS re-derives it from per-step pairings
    and curvature gaps.  Holds for arbitrary ancillary sequences.
    """
    h_star = as_vector(h_star, dim=trace.dim)
    horizon = trace.horizon
    weights = trace.weights
    weight_total = float(weights.sum())

    lhs = obj.value(trace.final_main) - obj.value(h_star)

    paired = 0.0
    bregman_to_star = 0.0
    for t in range(horizon):
        grad_main = obj.gradient(trace.main[t])
        paired += weights[t] * float(grad_main @ (trace.ancillary[t] - h_star))
        bregman_to_star += weights[t] * obj.bregman(h_star, trace.main[t])
    chain = 0.0
    weight_sums = trace.weight_sums
    for t in range(horizon - 1):
        chain += weight_sums[t] * obj.bregman(trace.main[t], trace.main[t + 1])
    rhs = (paired - bregman_to_star - chain) / weight_total

    reg = regret(trace, h_star)
    error_sum = 0.0
    for t in range(horizon):
        err = trace.grads_processed[t] - obj.gradient(trace.main[t])
        error_sum += weights[t] * float(err @ (h_star - trace.ancillary[t]))

    return AnytimeAudit(
        lhs=lhs,
        rhs=rhs,
        regret=reg,
        gradient_error_sum=error_sum,
        bregman_sum=bregman_to_star + chain,
        weight_total=weight_total,
    )
