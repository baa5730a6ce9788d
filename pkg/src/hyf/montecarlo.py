"""Repeated adversary trials and the empirical loss grid.

Each trial draws an accepted input pair, applies the interval-rule
detector and records ``f/m``.  Per-trial randomness is keyed by
``(seed, trial)``, so the aggregate is independent of execution order.
The default boundary mode is ``"interior"``: only detections at indices
2..M-2 of each leg enter the count.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal, Sequence

import numpy as np

from .adversary import AdversaryConfig, generate_inputs, theoretical_loss
from .nonextant import data_loss_ratio, detect_interval_rule

BoundaryMode = Literal["interior", "total"]

_MODES = ("interior", "total")


@dataclass(frozen=True)
class TrialSummary:
    """Mean and sample deviation of the loss ratio over repeated trials."""

    config: AdversaryConfig
    runs: int
    mean_loss: float
    std_loss: float
    theoretical: float
    boundary_mode: str


@dataclass(frozen=True)
class LossTable:
    """Grid of summaries by horizon and rate pair, plus the exact row."""

    horizons: tuple[float, ...]
    rate_pairs: tuple[tuple[float, float], ...]
    rows: tuple[tuple[TrialSummary, ...], ...]
    theoretical: tuple[float, ...]

    def cells(self) -> list[TrialSummary]:
        return [summary for row in self.rows for summary in row]


def run_experiment(
    config: AdversaryConfig,
    runs: int,
    boundary_mode: BoundaryMode = "interior",
) -> TrialSummary:
    """Aggregate the loss ratio over ``runs`` independent trials.

    The sample standard deviation uses the n-1 divisor, hence ``runs``
    must be at least 2.
    """
    if runs < 2:
        raise ValueError(f"need at least 2 runs for a deviation estimate, got {runs}")
    if boundary_mode not in _MODES:
        raise ValueError(f"boundary_mode must be one of {_MODES}, got {boundary_mode!r}")
    include = boundary_mode == "total"
    losses = np.empty(runs, dtype=float)
    for trial in range(runs):
        s1, s2 = generate_inputs(config, trial=trial)
        report = detect_interval_rule(s1, s2, include_boundary=include)
        losses[trial] = data_loss_ratio(report)
    return TrialSummary(
        config=config,
        runs=runs,
        mean_loss=float(losses.mean()),
        std_loss=float(losses.std(ddof=1)),
        theoretical=theoretical_loss(config.rate_a, config.rate_b),
        boundary_mode=boundary_mode,
    )


def loss_table(
    rate_pairs: Sequence[tuple[float, float]],
    horizons: Sequence[float],
    runs: int,
    seed: int,
    boundary_mode: BoundaryMode = "interior",
    min_points: int = 2,
    max_resamples: int = 1000,
) -> LossTable:
    """Empirical loss grid over all (horizon, rate pair) combinations."""
    if not rate_pairs:
        raise ValueError("need at least one rate pair")
    if not horizons:
        raise ValueError("need at least one horizon")
    rate_pairs = tuple((float(a), float(b)) for a, b in rate_pairs)
    horizons = tuple(float(t) for t in horizons)

    base = AdversaryConfig(
        rate_a=rate_pairs[0][0],
        rate_b=rate_pairs[0][1],
        horizon=horizons[0],
        seed=seed,
        min_points=min_points,
        max_resamples=max_resamples,
    )
    rows = []
    for horizon in horizons:
        row = []
        for rate_a, rate_b in rate_pairs:
            config = replace(base, rate_a=rate_a, rate_b=rate_b, horizon=horizon)
            row.append(run_experiment(config, runs, boundary_mode))
        rows.append(tuple(row))
    return LossTable(
        horizons=horizons,
        rate_pairs=rate_pairs,
        rows=tuple(rows),
        theoretical=tuple(theoretical_loss(a, b) for a, b in rate_pairs),
    )
