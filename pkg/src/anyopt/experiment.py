"""Benchmark protocol: three SGD variants under identical budgets.

Per trial and method the dataset is shuffled and split 80/20, the training
order is reshuffled every epoch, mini-batch logistic gradients feed the
selected update rule, and train/test losses are recorded at each epoch end at
the method's reported point (a running average in all three cases).

Methods:
  sgd-ave             gradients queried at the current iterate h_t
  anytime-sgd         gradients queried at the running average h_bar_t
  anytime-robust-sgd  same, with gradients clipped toward a fixed anchor
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

from .conversion import AnytimeState, weighting_update
from .objectives import MulticlassLogistic
from .oracles import MiniBatchOracle, child_rng
from .robust import HeuristicThreshold, empirical_anchor, process

METHODS = ("sgd-ave", "anytime-sgd", "anytime-robust-sgd")
_METHOD_CODE = {name: i + 1 for i, name in enumerate(METHODS)}


@dataclass(frozen=True)
class ExperimentConfig:
    method: str = "anytime-robust-sgd"
    trials: int = 10
    epochs: int = 5
    batch_size: int = 8
    delta: float = 0.05
    split: float = 0.8
    init_range: float = 0.05
    master_seed: int = 0
    anchor_refresh_epochs: int = 0
    timings: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.trials < 1 or self.epochs < 1 or self.batch_size < 1:
            raise ValueError("trials, epochs, and batch_size must be >= 1")
        if not 0.0 < self.split < 1.0:
            raise ValueError("split ratio must lie in (0, 1)")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")


@dataclass(frozen=True)
class ResultRecord:
    trial: int
    epoch: int
    method: str
    train_loss: float
    test_loss: float
    truncation_rate: float
    wall_time_ms: float


def _trial_rng(config, trial):
    return child_rng(config.master_seed, trial, _METHOD_CODE[config.method])


def _split_dataset(dataset, rng, split):
    n = dataset.n_examples
    order = rng.permutation(n)
    n_train = int(math.floor(split * n))
    train, test = order[:n_train], order[n_train:]
    make = lambda idx: MulticlassLogistic(
        dataset.features[idx], dataset.labels[idx], dataset.class_count
    )
    return make(train), make(test)


def _run_single_trial(config, dataset, trial):
    rng = _trial_rng(config, trial)
    train_obj, test_obj = _split_dataset(dataset, rng, config.split)
    n_train = train_obj.n_examples
    dim = train_obj.dim

    h = rng.uniform(-config.init_range, config.init_range, size=dim)
    beta = 2.0 / math.sqrt(n_train)
    oracle = MiniBatchOracle(config.batch_size, seed=rng.integers(2**63), shuffle=True)
    steps_per_epoch = oracle.steps_per_epoch(n_train)

    robust = config.method == "anytime-robust-sgd"
    anytime = config.method != "sgd-ave"
    anchor = None
    schedule = None
    if robust:
        anchor = empirical_anchor(train_obj, h, delta=config.delta)
        schedule = HeuristicThreshold.for_benchmark(n_train, config.delta)

    state = AnytimeState.initial(h, 1.0)
    records = []
    started = time.perf_counter() if config.timings else None
    for epoch in range(1, config.epochs + 1):
        clipped = 0
        for _ in range(steps_per_epoch):
            query_point = state.h_bar if anytime else state.h
            grad = oracle.query(train_obj, query_point)
            if robust:
                grad, flag = process(grad, anchor, schedule.threshold_at(query_point, anchor))
                clipped += flag
            weighting_update(state, state.h - beta * grad, 1.0)

        if robust and config.anchor_refresh_epochs and epoch % config.anchor_refresh_epochs == 0:
            anchor = empirical_anchor(train_obj, state.h_bar, delta=config.delta)

        report_point = state.h_bar
        train_loss = train_obj.value(report_point)
        test_loss = test_obj.value(report_point)
        if not (math.isfinite(train_loss) and math.isfinite(test_loss)):
            raise RuntimeError(
                f"non-finite loss in trial {trial} epoch {epoch} ({config.method}): "
                f"train={train_loss}, test={test_loss}"
            )
        elapsed_ms = (time.perf_counter() - started) * 1e3 if config.timings else 0.0
        records.append(
            ResultRecord(
                trial=trial,
                epoch=epoch,
                method=config.method,
                train_loss=train_loss,
                test_loss=test_loss,
                truncation_rate=clipped / steps_per_epoch if robust else 0.0,
                wall_time_ms=elapsed_ms,
            )
        )
    return records


def run_experiment(config, dataset):
    """Run all trials of one method; records come back in (trial, epoch) order."""
    records = []
    for trial in range(config.trials):
        records.extend(_run_single_trial(config, dataset, trial))
    return records


def run_methods(config, dataset, methods=METHODS):
    """Convenience: run several methods under the same config skeleton."""
    records = []
    for method in methods:
        records.extend(run_experiment(replace(config, method=method), dataset))
    return records
