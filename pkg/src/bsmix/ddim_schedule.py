"""Scaled-linear DDIM noise schedule and the quantities the controller reads
from it: per-inference-step posterior variances, the volatility feed, and the
clean-sample extrapolation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SIGMA_FLOOR",
    "ScheduleConfig",
    "DiffusionSchedule",
    "build_schedule",
    "alpha_bar_at",
    "prev_alpha_bar_at",
    "step_variance",
    "sigma_at",
    "predict_x0",
    "time_to_expiry",
]

# The last inference step treats the fully denoised state as its predecessor
# (alpha_bar_prev = 1), so its posterior variance is exactly 0. Pricing needs
# a strictly positive volatility, hence the floor.
SIGMA_FLOOR = 1e-6


@dataclass(frozen=True)
class ScheduleConfig:
    """Schedule hyperparameters. Defaults match the usual latent-diffusion
    scaled-linear setup: betas from 0.00085 to 0.012 over 1000 training steps,
    sampled at 100 inference steps."""

    beta_start: float = 0.00085
    beta_end: float = 0.012
    num_train_steps: int = 1000
    num_inference_steps: int = 100


@dataclass(frozen=True)
class DiffusionSchedule:
    """Precomputed schedule arrays. All arrays are read-only.

    betas / alpha_bars are indexed by training timestep; inference_timesteps
    and variances by inference-step position (0 = noisiest, descending
    training timesteps)."""

    config: ScheduleConfig
    betas: np.ndarray
    alpha_bars: np.ndarray
    inference_timesteps: np.ndarray
    variances: np.ndarray

    @property
    def num_train_steps(self) -> int:
        return self.config.num_train_steps

    @property
    def num_inference_steps(self) -> int:
        return self.config.num_inference_steps


def _validate_config(cfg: ScheduleConfig) -> None:
    if not (isinstance(cfg.num_train_steps, int) and cfg.num_train_steps >= 1):
        raise ValueError("num_train_steps must be an integer >= 1")
    if not (isinstance(cfg.num_inference_steps, int) and cfg.num_inference_steps >= 1):
        raise ValueError("num_inference_steps must be an integer >= 1")
    if cfg.num_inference_steps > cfg.num_train_steps:
        raise ValueError("num_inference_steps must not exceed num_train_steps")
    for name in ("beta_start", "beta_end"):
        v = getattr(cfg, name)
        if not (isinstance(v, (int, float)) and math.isfinite(v)):
            raise ValueError(f"{name} must be a finite real")
    if not (0.0 < cfg.beta_start <= cfg.beta_end < 1.0):
        raise ValueError("betas must satisfy 0 < beta_start <= beta_end < 1")


def build_schedule(cfg: ScheduleConfig = ScheduleConfig()) -> DiffusionSchedule:
    """Materialize the schedule.

    betas interpolate linearly in sqrt space; alpha_bars are the running
    products of (1 - beta); inference timesteps stride the training range in
    descending order, largest first. Each inference step's variance is
    ((1 - ab_prev) / (1 - ab_t)) * (1 - ab_t / ab_prev) with ab_prev taken
    from the next (smaller) timestep and pinned to 1 at the final step.
    """
    _validate_config(cfg)
    if cfg.num_train_steps == 1:
        sqrt_betas = np.array([math.sqrt(cfg.beta_start)])
    else:
        sqrt_betas = np.linspace(
            math.sqrt(cfg.beta_start), math.sqrt(cfg.beta_end), cfg.num_train_steps
        )
    betas = sqrt_betas * sqrt_betas
    alpha_bars = np.cumprod(1.0 - betas)
    stride = cfg.num_train_steps // cfg.num_inference_steps
    timesteps = (np.arange(cfg.num_inference_steps, dtype=np.int64) * stride)[::-1].copy()
    ab_t = alpha_bars[timesteps]
    ab_prev = np.append(alpha_bars[timesteps[1:]], 1.0)
    variances = ((1.0 - ab_prev) / (1.0 - ab_t)) * (1.0 - ab_t / ab_prev)
    for arr in (betas, alpha_bars, timesteps, variances):
        arr.setflags(write=False)
    return DiffusionSchedule(cfg, betas, alpha_bars, timesteps, variances)


def _check_inference_index(schedule: DiffusionSchedule, i: int) -> None:
    if not isinstance(i, (int, np.integer)) or isinstance(i, bool):
        raise ValueError("inference step index must be an integer")
    if not 0 <= i < schedule.num_inference_steps:
        raise ValueError(
            f"inference step index {i} out of range [0, {schedule.num_inference_steps})"
        )


def alpha_bar_at(schedule: DiffusionSchedule, i: int) -> float:
    """alpha_bar at inference step i (its training timestep's entry)."""
    _check_inference_index(schedule, i)
    return float(schedule.alpha_bars[schedule.inference_timesteps[i]])


def prev_alpha_bar_at(schedule: DiffusionSchedule, i: int) -> float:
    """alpha_bar of the step after i in inference order; 1.0 past the end."""
    _check_inference_index(schedule, i)
    if i + 1 >= schedule.num_inference_steps:
        return 1.0
    return float(schedule.alpha_bars[schedule.inference_timesteps[i + 1]])


def step_variance(schedule: DiffusionSchedule, i: int) -> float:
    """Posterior variance of inference step i. Always >= 0; exactly 0 at the
    final step."""
    _check_inference_index(schedule, i)
    return float(schedule.variances[i])


def sigma_at(schedule: DiffusionSchedule, i: int, floor: float = SIGMA_FLOOR) -> float:
    """Volatility feed for pricing: sqrt of the step variance, floored."""
    if not (isinstance(floor, (int, float)) and math.isfinite(floor) and floor > 0.0):
        raise ValueError("sigma floor must be a positive finite real")
    return max(math.sqrt(step_variance(schedule, i)), float(floor))


def predict_x0(x_t: np.ndarray, eps: np.ndarray, alpha_bar: float) -> np.ndarray:
    """Extrapolate the clean sample from a noisy state and its noise estimate:
    (x_t - sqrt(1 - alpha_bar) * eps) / sqrt(alpha_bar)."""
    if not (isinstance(alpha_bar, (int, float)) and math.isfinite(alpha_bar)):
        raise ValueError("alpha_bar must be a finite real")
    if not 0.0 < alpha_bar <= 1.0:
        raise ValueError("alpha_bar must lie in (0, 1]")
    x_t = np.asarray(x_t, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    if x_t.shape != eps.shape:
        raise ValueError(f"shape mismatch: x_t {x_t.shape} vs eps {eps.shape}")
    return (x_t - math.sqrt(1.0 - alpha_bar) * eps) / math.sqrt(alpha_bar)


def time_to_expiry(total_steps: int, i: int) -> int:
    """Steps remaining before sampling ends: total_steps - i."""
    if not (isinstance(total_steps, (int, np.integer)) and total_steps >= 1):
        raise ValueError("total_steps must be an integer >= 1")
    if not isinstance(i, (int, np.integer)) or isinstance(i, bool):
        raise ValueError("step index must be an integer")
    if not 0 <= i <= total_steps:
        raise ValueError(f"step index {i} out of range [0, {total_steps}]")
    return int(total_steps) - int(i)
