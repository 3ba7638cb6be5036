"""A deliberately simple score environment for strategy tournaments.

Conditioning on a prompt raises its score by a fixed gain and decays every
other prompt; optional Gaussian noise perturbs each prompt independently.
Scores live in [0, 1]. The dynamics are trivial on purpose: with zero noise a
run is exactly reproducible arithmetic, which makes hand-checked golden traces
possible, and the laggard/leader trade-off the controller exploits is still
present.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import metrics
from .ddim_schedule import DiffusionSchedule
from .mixer import Conditioning, MixerConfig, Strategy, Trace, run_strategy
from .parallel import run_jobs

__all__ = [
    "SimEnvConfig",
    "SimEnvironment",
    "sim_step",
    "run_tournament",
]


@dataclass(frozen=True)
class SimEnvConfig:
    """Score dynamics: per-step gain for the conditioned prompt, decay for the
    rest, and the std-dev of the independent per-prompt noise."""

    initial_scores: tuple[float, ...]
    gain: float = 0.05
    decay: float = 0.01
    noise_vol: float = 0.0

    def __post_init__(self):
        scores = tuple(float(s) for s in self.initial_scores)
        if len(scores) < 2:
            raise ValueError("initial_scores needs at least 2 prompts")
        if any(not math.isfinite(s) or not 0.0 <= s <= 1.0 for s in scores):
            raise ValueError("initial_scores must lie in [0, 1]")
        object.__setattr__(self, "initial_scores", scores)
        for name in ("gain", "decay", "noise_vol"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be a finite real >= 0")

    @property
    def num_prompts(self) -> int:
        return len(self.initial_scores)


def sim_step(
    scores: Sequence[float], chosen: int, cfg: SimEnvConfig, noise: Sequence[float]
) -> np.ndarray:
    """One update: scores[chosen] += gain + noise[chosen], every other prompt
    gets -= decay + noise[other]; results clamp to [0, 1]. Pure in its
    arguments; the caller supplies the noise draws."""
    arr = np.asarray(scores, dtype=np.float64)
    eta = np.asarray(noise, dtype=np.float64)
    if arr.shape != (cfg.num_prompts,) or eta.shape != arr.shape:
        raise ValueError("scores and noise must both have one entry per prompt")
    if not 0 <= chosen < cfg.num_prompts:
        raise ValueError(f"chosen index {chosen} out of range [0, {cfg.num_prompts})")
    out = arr - cfg.decay - eta
    out[chosen] = arr[chosen] + cfg.gain + eta[chosen]
    return np.clip(out, 0.0, 1.0)


class SimEnvironment:
    """ScoreEnvironment over SimEnvConfig dynamics.

    Combined conditioning (step 0, or lerp throughout) applies the gain to
    every prompt with no decay: the blended concept nudges alignment to all
    concepts at once. Noise is drawn as one length-N vector per step whether
    or not the draw is used for a given prompt, so runs that share a seed see
    identical noise regardless of the strategy's choices.
    """

    def __init__(self, cfg: SimEnvConfig):
        self.cfg = cfg
        self.num_prompts = cfg.num_prompts
        self._scores: Optional[np.ndarray] = None
        self._rng: Optional[np.random.Generator] = None

    def begin(self, rng: np.random.Generator) -> None:
        self._rng = rng
        self._scores = np.asarray(self.cfg.initial_scores, dtype=np.float64)

    def step(self, index: int, conditioning: Conditioning) -> np.ndarray:
        if self._scores is None or self._rng is None:
            raise RuntimeError("begin() must run before step()")
        if self.cfg.noise_vol > 0.0:
            noise = self._rng.standard_normal(self.num_prompts) * self.cfg.noise_vol
        else:
            noise = np.zeros(self.num_prompts)
        if conditioning is None:
            self._scores = np.clip(self._scores + self.cfg.gain + noise, 0.0, 1.0)
        else:
            self._scores = sim_step(self._scores, conditioning, self.cfg, noise)
        return self._scores.copy()

    def final_scores(self) -> np.ndarray:
        if self._scores is None:
            raise RuntimeError("begin() must run before final_scores()")
        return self._scores.copy()


def run_tournament(
    env_cfg: SimEnvConfig,
    strategies: Sequence[Strategy],
    mixer_cfg: MixerConfig,
    schedule: DiffusionSchedule,
    num_seeds: int,
    master_seed: int = 0,
) -> tuple[list[metrics.RunSummary], list[Trace]]:
    """Run every strategy over the same seed list and summarize.

    Run k of every strategy uses seed master_seed + k, so strategies face
    identical noise streams (each run still owns its RNG, derived from the
    master seed and run index). Returns (summaries, all traces); both are
    deterministic for a fixed seed list.
    """
    if not (isinstance(num_seeds, int) and num_seeds >= 1):
        raise ValueError("num_seeds must be an integer >= 1")
    if not strategies:
        raise ValueError("need at least one strategy")

    def make_job(strategy: Strategy, k: int):
        def job() -> Trace:
            return run_strategy(
                SimEnvironment(env_cfg), strategy, mixer_cfg, schedule, master_seed + k
            )

        return job

    jobs = [make_job(s, k) for s in strategies for k in range(num_seeds)]
    traces = run_jobs(jobs)
    return metrics.aggregate(traces), traces
