"""Trace metrics: blend quality per run and aggregates across seeds.

balance (the worst per-prompt final score) is the headline number -- a good
blend leaves no concept behind. combined is the mean final score, and
selection entropy measures how evenly a strategy spread its conditioning
choices over the strategy-controlled steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .mixer import Trace

__all__ = [
    "RunSummary",
    "balance",
    "combined",
    "selection_histogram",
    "selection_entropy",
    "aggregate",
]


@dataclass(frozen=True)
class RunSummary:
    """Per-strategy aggregate over seeds. Standard errors use ddof=1 and are
    0.0 for a single trace. selection_histogram is the per-seed mean count of
    each prompt over the T-1 strategy-controlled steps (so it sums to T-1,
    fractionally once averaged)."""

    strategy: str
    seeds: int
    balance_mean: float
    balance_se: float
    combined_mean: float
    combined_se: float
    entropy_mean: float
    selection_histogram: tuple[float, ...]


def balance(final_scores: Sequence[float]) -> float:
    """Minimum final score: the blend is only as good as its weakest concept."""
    scores = np.asarray(final_scores, dtype=np.float64)
    if scores.ndim != 1 or scores.size == 0:
        raise ValueError("final_scores must be a non-empty 1-D array")
    return float(scores.min())


def combined(final_scores: Sequence[float]) -> float:
    """Mean final score."""
    scores = np.asarray(final_scores, dtype=np.float64)
    if scores.ndim != 1 or scores.size == 0:
        raise ValueError("final_scores must be a non-empty 1-D array")
    return float(scores.mean())


def selection_histogram(trace: Trace) -> np.ndarray:
    """Counts of each prompt over the strategy-controlled conditionings.

    Step 0 is always combined-conditioned, so only decisions 0..T-2 (which
    condition steps 1..T-1) count; the sum is T-1.
    """
    n = trace.num_prompts
    counts = np.zeros(n, dtype=np.int64)
    for decision in trace.decisions[:-1]:
        if not 0 <= decision.chosen < n:
            raise ValueError(f"decision at step {decision.step} chose {decision.chosen}, outside [0, {n})")
        counts[decision.chosen] += 1
    return counts


def selection_entropy(trace: Trace) -> float:
    """Shannon entropy (nats) of the empirical selection distribution.

    0 when one prompt takes every controlled step; ln(N) at a perfectly even
    spread.
    """
    counts = selection_histogram(trace)
    total = counts.sum()
    if total == 0:
        return 0.0
    probs = counts[counts > 0] / total
    return float(-(probs * np.log(probs)).sum())


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    mean = float(values.mean())
    if values.size > 1:
        se = float(values.std(ddof=1) / math.sqrt(values.size))
    else:
        se = 0.0
    return mean, se


def aggregate(traces: Sequence[Trace]) -> list["RunSummary"]:
    """Group traces by strategy and reduce to mean +/- stderr per metric.

    Groups keep first-appearance order. A single trace yields its own values
    with stderr 0. Aggregation is permutation-invariant within a group.
    """
    if not traces:
        raise ValueError("aggregate needs at least one trace")
    grouped: dict[str, list[Trace]] = {}
    for trace in traces:
        grouped.setdefault(trace.strategy, []).append(trace)
    summaries = []
    for name, group in grouped.items():
        balances = np.array([balance(t.final_scores) for t in group])
        combineds = np.array([combined(t.final_scores) for t in group])
        entropies = np.array([selection_entropy(t) for t in group])
        histogram = np.mean([selection_histogram(t) for t in group], axis=0)
        b_mean, b_se = _mean_se(balances)
        c_mean, c_se = _mean_se(combineds)
        e_mean, _ = _mean_se(entropies)
        summaries.append(
            RunSummary(
                strategy=name,
                seeds=len(group),
                balance_mean=b_mean,
                balance_se=b_se,
                combined_mean=c_mean,
                combined_se=c_se,
                entropy_mean=e_mean,
                selection_histogram=tuple(float(h) for h in histogram),
            )
        )
    return summaries
