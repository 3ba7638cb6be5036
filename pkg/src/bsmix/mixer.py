"""Per-step prompt selection.

At every denoising step the controller receives one alignment score per
prompt in [0, 1], maps each to a call value (spot = score * scale, shared
strike / rate / volatility / time-to-expiry), and conditions the next step on
the prompt whose option is cheapest -- the laggard with the most remaining
upside. Baseline policies (previous-step minimum, alternation, a one-time
switch, always-blended, single-prompt) share the same run loop so their traces
are directly comparable.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Protocol, Sequence

import numpy as np

from .ddim_schedule import DiffusionSchedule, sigma_at, time_to_expiry
from .option_pricing import OptionParams, bs_call_price

__all__ = [
    "COMBINED",
    "Conditioning",
    "MixerConfig",
    "Strategy",
    "StepDecision",
    "Trace",
    "ScoreEnvironment",
    "bs_scores",
    "choose_black_scholes",
    "choose_clip_min",
    "choose_alternating",
    "choose_stepwise",
    "calibrate_strike",
    "run_strategy",
]

log = logging.getLogger(__name__)

# Conditioning for a step: a prompt index, or COMBINED (None) for the blended
# all-prompts concept that every run starts from.
Conditioning = Optional[int]
COMBINED: Conditioning = None

_STRATEGY_KINDS = ("black_scholes", "clip_min", "alternating", "stepwise", "lerp", "single")


@dataclass(frozen=True)
class MixerConfig:
    """Controller parameters.

    rate defaults to 1/total_steps. strike is the option strike on the scaled
    score axis (scores in [0,1] are multiplied by score_scale before pricing).
    strike_mode records whether strike was fixed by hand or calibrated from a
    combined-conditioning run's mean final score; the value in `strike` is
    what gets priced either way.
    """

    num_prompts: int
    total_steps: int
    strike: float = 25.0
    rate: Optional[float] = None
    score_scale: float = 100.0
    strike_mode: str = "fixed"

    def __post_init__(self):
        if not (isinstance(self.num_prompts, int) and self.num_prompts >= 2):
            raise ValueError("num_prompts must be an integer >= 2")
        if not (isinstance(self.total_steps, int) and self.total_steps >= 1):
            raise ValueError("total_steps must be an integer >= 1")
        if self.rate is None:
            object.__setattr__(self, "rate", 1.0 / self.total_steps)
        if not (isinstance(self.rate, (int, float)) and math.isfinite(self.rate)):
            raise ValueError("rate must be a finite real")
        if not (isinstance(self.strike, (int, float)) and math.isfinite(self.strike) and self.strike >= 0.0):
            raise ValueError("strike must be a finite real >= 0")
        if not (isinstance(self.score_scale, (int, float)) and math.isfinite(self.score_scale) and self.score_scale > 0.0):
            raise ValueError("score_scale must be a finite real > 0")
        if self.strike_mode not in ("fixed", "calibrated"):
            raise ValueError("strike_mode must be 'fixed' or 'calibrated'")


@dataclass(frozen=True)
class Strategy:
    """A named selection policy.

    kind: black_scholes | clip_min | alternating | stepwise | lerp | single.
    stepwise switches from prompt 0 to prompt 1 at decision index switch_step;
    single always conditions on `prompt`. lerp never leaves the combined
    concept; its recorded `chosen` is the option-score argmin (a diagnostic of
    what the priced rule would have picked), since a trace decision always
    carries a concrete prompt index.
    """

    kind: str
    switch_step: int = 12
    prompt: int = 0

    def __post_init__(self):
        if self.kind not in _STRATEGY_KINDS:
            raise ValueError(f"unknown strategy kind {self.kind!r}; expected one of {_STRATEGY_KINDS}")
        if not (isinstance(self.switch_step, int) and self.switch_step >= 1):
            raise ValueError("switch_step must be an integer >= 1")
        if not (isinstance(self.prompt, int) and self.prompt >= 0):
            raise ValueError("prompt must be an integer >= 0")

    @property
    def name(self) -> str:
        if self.kind == "stepwise":
            return f"stepwise:{self.switch_step}"
        if self.kind == "single":
            return f"single:{self.prompt}"
        return self.kind

    @classmethod
    def parse(cls, text: str) -> "Strategy":
        """Parse 'black_scholes', 'stepwise:12', 'single:1', ..."""
        head, _, arg = text.strip().partition(":")
        if head == "stepwise":
            return cls("stepwise", switch_step=int(arg) if arg else 12)
        if head == "single":
            return cls("single", prompt=int(arg) if arg else 0)
        if arg:
            raise ValueError(f"strategy {head!r} takes no argument")
        return cls(head)


@dataclass(frozen=True)
class StepDecision:
    """One row of a run trace: the scores measured after this step's update
    and the conditioning selected for the next step."""

    step: int
    raw_scores: tuple[float, ...]
    spot_prices: tuple[float, ...]
    sigma: float
    tte: int
    bs_scores: tuple[float, ...]
    chosen: int


@dataclass(frozen=True)
class Trace:
    """Full record of one run: T decisions plus the final per-prompt scores."""

    strategy: str
    seed: int
    decisions: tuple[StepDecision, ...]
    final_scores: tuple[float, ...]

    @property
    def num_prompts(self) -> int:
        return len(self.final_scores)


class ScoreEnvironment(Protocol):
    """Anything that can be driven by run_strategy.

    begin() resets run state with the run's RNG; step() applies one update
    under the given conditioning and returns the per-prompt raw scores it
    produced; final_scores() returns the scores after the last step.
    """

    num_prompts: int

    def begin(self, rng: np.random.Generator) -> None: ...

    def step(self, index: int, conditioning: Conditioning) -> np.ndarray: ...

    def final_scores(self) -> np.ndarray: ...


def bs_scores(
    raw_scores: Sequence[float], tte: int, sigma: float, cfg: MixerConfig
) -> list[float]:
    """Call value of each prompt's scaled score under shared terms."""
    scores = np.asarray(raw_scores, dtype=np.float64)
    if scores.ndim != 1 or scores.size == 0:
        raise ValueError("raw_scores must be a non-empty 1-D array")
    if not np.all(np.isfinite(scores)):
        raise ValueError("raw_scores must be finite")
    if not (isinstance(sigma, (int, float)) and math.isfinite(sigma) and sigma >= 0.0):
        raise ValueError("sigma must be a finite real >= 0")
    if not (isinstance(tte, (int, np.integer)) and tte >= 1):
        raise ValueError("tte must be an integer >= 1")
    return [
        bs_call_price(
            OptionParams(
                spot=float(s) * cfg.score_scale,
                strike=cfg.strike,
                rate=cfg.rate,
                vol=float(sigma),
                tte=float(tte),
            )
        ).price
        for s in scores
    ]


def _argmin_lowest_index(values: Sequence[float]) -> int:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("expected a non-empty 1-D array")
    # np.argmin already returns the first minimum, i.e. the lowest index.
    return int(np.argmin(arr))


def choose_black_scholes(
    raw_scores: Sequence[float], tte: int, sigma: float, cfg: MixerConfig
) -> int:
    """Index of the cheapest option; ties break to the lowest index.

    Because the call value is strictly increasing in spot and all prompts
    share (strike, rate, sigma, tte), this is the argmin of the raw scores
    whenever those terms are shared -- the priced rule differs from a plain
    score argmin only in *which* scores it is fed.
    """
    return _argmin_lowest_index(bs_scores(raw_scores, tte, sigma, cfg))


def choose_clip_min(prev_raw_scores: Optional[Sequence[float]]) -> int:
    """Argmin of the previous iteration's raw scores; prompt 0 when no
    previous iteration exists yet (documented cold-start rule)."""
    if prev_raw_scores is None:
        return 0
    return _argmin_lowest_index(prev_raw_scores)


def choose_alternating(step: int, num_prompts: int) -> int:
    """Cycle through prompts: step mod num_prompts."""
    if not (isinstance(num_prompts, int) and num_prompts >= 1):
        raise ValueError("num_prompts must be an integer >= 1")
    if not (isinstance(step, (int, np.integer)) and step >= 0):
        raise ValueError("step must be an integer >= 0")
    return int(step) % num_prompts


def choose_stepwise(step: int, switch_step: int) -> int:
    """Prompt 0 while step < switch_step, prompt 1 afterwards."""
    if not (isinstance(step, (int, np.integer)) and step >= 0):
        raise ValueError("step must be an integer >= 0")
    if not (isinstance(switch_step, int) and switch_step >= 1):
        raise ValueError("switch_step must be an integer >= 1")
    return 0 if step < switch_step else 1


def calibrate_strike(final_combined_scores: Sequence[float], cfg: MixerConfig) -> float:
    """Strike from combined-conditioning runs: mean final score x scale."""
    scores = np.asarray(final_combined_scores, dtype=np.float64)
    if scores.ndim != 1 or scores.size == 0:
        raise ValueError("final_combined_scores must be a non-empty 1-D array")
    if not np.all(np.isfinite(scores)):
        raise ValueError("final_combined_scores must be finite")
    return float(scores.mean() * cfg.score_scale)


def _clamp_scores(raw: np.ndarray, step: int, warned: list[bool]) -> np.ndarray:
    if np.any((raw < 0.0) | (raw > 1.0)):
        if not warned[0]:
            log.warning("raw scores outside [0, 1] at step %d; clamping", step)
            warned[0] = True
        raw = np.clip(raw, 0.0, 1.0)
    return raw


def run_strategy(
    env: ScoreEnvironment,
    strategy: Strategy,
    cfg: MixerConfig,
    schedule: DiffusionSchedule,
    seed: int,
) -> Trace:
    """Drive the environment for cfg.total_steps steps under a strategy.

    Step 0 always conditions on the combined concept; from step 1 on, each
    step's conditioning is the previous decision's `chosen` (except lerp,
    which stays combined throughout). Policy strategies (alternating,
    stepwise) are keyed by the decision index, so decision i conditions step
    i+1. Scores landing outside [0, 1] are clamped with one logged warning
    per run. Identical (env config, strategy, cfg, seed) reproduce the trace
    exactly.
    """
    if env.num_prompts != cfg.num_prompts:
        raise ValueError(
            f"environment exposes {env.num_prompts} prompts but config expects {cfg.num_prompts}"
        )
    if schedule.num_inference_steps != cfg.total_steps:
        raise ValueError(
            "schedule.num_inference_steps must equal cfg.total_steps "
            f"({schedule.num_inference_steps} != {cfg.total_steps})"
        )
    if strategy.kind == "single" and not strategy.prompt < cfg.num_prompts:
        raise ValueError(f"single({strategy.prompt}) needs prompt < {cfg.num_prompts}")
    if strategy.kind == "stepwise" and not 1 <= strategy.switch_step <= cfg.total_steps - 1:
        raise ValueError(
            f"switch_step must lie in [1, {cfg.total_steps - 1}], got {strategy.switch_step}"
        )

    rng = np.random.default_rng(seed)
    env.begin(rng)
    decisions: list[StepDecision] = []
    conditioning: Conditioning = COMBINED
    prev_raw: Optional[np.ndarray] = None
    warned = [False]

    for i in range(cfg.total_steps):
        try:
            raw = np.asarray(env.step(i, conditioning), dtype=np.float64)
        except Exception as exc:
            raise RuntimeError(f"environment failed at step {i}: {exc}") from exc
        if raw.shape != (cfg.num_prompts,):
            raise RuntimeError(
                f"environment returned shape {raw.shape} at step {i}, expected ({cfg.num_prompts},)"
            )
        raw = _clamp_scores(raw, i, warned)
        sigma = sigma_at(schedule, i)
        tte = time_to_expiry(cfg.total_steps, i)
        prices = bs_scores(raw, tte, sigma, cfg)

        if strategy.kind in ("black_scholes", "lerp"):
            chosen = _argmin_lowest_index(prices)
        elif strategy.kind == "clip_min":
            chosen = choose_clip_min(prev_raw)
        elif strategy.kind == "alternating":
            chosen = choose_alternating(i, cfg.num_prompts)
        elif strategy.kind == "stepwise":
            chosen = choose_stepwise(i, strategy.switch_step)
        else:  # single
            chosen = strategy.prompt

        decisions.append(
            StepDecision(
                step=i,
                raw_scores=tuple(float(s) for s in raw),
                spot_prices=tuple(float(s) * cfg.score_scale for s in raw),
                sigma=float(sigma),
                tte=int(tte),
                bs_scores=tuple(prices),
                chosen=int(chosen),
            )
        )
        prev_raw = raw
        conditioning = COMBINED if strategy.kind == "lerp" else int(chosen)

    final = np.asarray(env.final_scores(), dtype=np.float64)
    return Trace(
        strategy=strategy.name,
        seed=int(seed),
        decisions=tuple(decisions),
        final_scores=tuple(float(s) for s in final),
    )
