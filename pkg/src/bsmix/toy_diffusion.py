"""Analytic toy diffusion over Gaussian-mixture concepts.

Each concept is a small Gaussian mixture whose diffused marginals and score
gradients are available in closed form, so the reverse DDIM process runs with
an exact noise prediction instead of a learned one. Alignment of a clean
sample with a concept is its mixture density normalized by the density's peak
over the component means -- a [0, 1] stand-in for an embedding similarity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .ddim_schedule import (
    DiffusionSchedule,
    alpha_bar_at,
    predict_x0,
    prev_alpha_bar_at,
    step_variance,
)
from .mixer import Conditioning, MixerConfig, Strategy, Trace, run_strategy

__all__ = [
    "GaussianMixtureConcept",
    "ToyRunConfig",
    "ToyEnvironment",
    "diffused_mixture",
    "mixture_log_density",
    "score_gradient",
    "eps_prediction",
    "ddim_reverse_step",
    "alignment_score",
    "generate",
]


@dataclass(frozen=True)
class GaussianMixtureConcept:
    """A concept as a Gaussian mixture: weights (K,), means (K, d),
    covariances (K, d, d). Weights must sum to 1; covariances must be
    symmetric positive definite. d defaults to 2 in practice for plotting,
    but any dimension works."""

    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    label: str = ""

    def __post_init__(self):
        weights = np.atleast_1d(np.asarray(self.weights, dtype=np.float64))
        means = np.atleast_2d(np.asarray(self.means, dtype=np.float64))
        covs = np.asarray(self.covariances, dtype=np.float64)
        if covs.ndim == 2:
            covs = covs[np.newaxis, :, :]
        k, d = means.shape
        if weights.shape != (k,):
            raise ValueError(f"weights shape {weights.shape} does not match {k} components")
        if covs.shape != (k, d, d):
            raise ValueError(f"covariances shape {covs.shape}, expected ({k}, {d}, {d})")
        if np.any(weights <= 0.0) or not math.isclose(weights.sum(), 1.0, abs_tol=1e-12):
            raise ValueError("weights must be positive and sum to 1")
        for idx, cov in enumerate(covs):
            if not np.allclose(cov, cov.T, atol=1e-12):
                raise ValueError(f"covariance {idx} is not symmetric")
            try:
                np.linalg.cholesky(cov)
            except np.linalg.LinAlgError as exc:
                raise ValueError(f"covariance {idx} is not positive definite") from exc
        for arr in (weights, means, covs):
            arr.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covariances", covs)

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    @property
    def num_components(self) -> int:
        return self.means.shape[0]


def _check_alpha_bar(alpha_bar: float) -> float:
    if not (isinstance(alpha_bar, (int, float)) and math.isfinite(alpha_bar)):
        raise ValueError("alpha_bar must be a finite real")
    if not 0.0 < alpha_bar <= 1.0:
        raise ValueError("alpha_bar must lie in (0, 1]")
    return float(alpha_bar)


def diffused_mixture(
    concept: GaussianMixtureConcept, alpha_bar: float
) -> GaussianMixtureConcept:
    """The concept after forward diffusion to noise level alpha_bar:
    means scale by sqrt(alpha_bar), covariances become
    alpha_bar * Sigma + (1 - alpha_bar) * I. alpha_bar = 1 is the identity."""
    ab = _check_alpha_bar(alpha_bar)
    eye = np.eye(concept.dim)
    return GaussianMixtureConcept(
        weights=concept.weights.copy(),
        means=concept.means * math.sqrt(ab),
        covariances=ab * concept.covariances + (1.0 - ab) * eye,
        label=concept.label,
    )


def _component_quantities(concept: GaussianMixtureConcept):
    # Precision matrices and log normalizers per component.
    precisions = np.linalg.inv(concept.covariances)
    signs, logdets = np.linalg.slogdet(concept.covariances)
    if np.any(signs <= 0):
        raise ValueError("covariances must be positive definite")
    log_norms = -0.5 * (concept.dim * math.log(2.0 * math.pi) + logdets)
    return precisions, log_norms


def _component_log_densities(concept: GaussianMixtureConcept, x: np.ndarray) -> np.ndarray:
    # x: (..., d) -> (..., K) of log w_k + log N_k(x).
    precisions, log_norms = _component_quantities(concept)
    diff = x[..., np.newaxis, :] - concept.means  # (..., K, d)
    quad = np.einsum("...ki,kij,...kj->...k", diff, precisions, diff)
    return np.log(concept.weights) + log_norms - 0.5 * quad


def mixture_log_density(concept: GaussianMixtureConcept, x: np.ndarray) -> np.ndarray:
    """Log density of the mixture at x (shape (..., d) -> (...))."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != concept.dim:
        raise ValueError(f"x has dimension {x.shape[-1]}, concept is {concept.dim}-D")
    comp = _component_log_densities(concept, x)
    peak = comp.max(axis=-1)
    return peak + np.log(np.exp(comp - peak[..., np.newaxis]).sum(axis=-1))


def score_gradient(
    concept: GaussianMixtureConcept, x: np.ndarray, alpha_bar: float
) -> np.ndarray:
    """Gradient of the diffused mixture's log density at x.

    Responsibility-weighted sum of the per-component Gaussian scores
    -Sigma_k^{-1} (x - mu_k), evaluated on the alpha_bar-diffused mixture.
    Accepts a single point (d,) or a batch (..., d).
    """
    diffused = diffused_mixture(concept, alpha_bar)
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != diffused.dim:
        raise ValueError(f"x has dimension {x.shape[-1]}, concept is {diffused.dim}-D")
    precisions, _ = _component_quantities(diffused)
    comp = _component_log_densities(diffused, x)
    peak = comp.max(axis=-1, keepdims=True)
    resp = np.exp(comp - peak)
    resp /= resp.sum(axis=-1, keepdims=True)
    diff = x[..., np.newaxis, :] - diffused.means
    comp_scores = -np.einsum("kij,...kj->...ki", precisions, diff)
    return (resp[..., np.newaxis] * comp_scores).sum(axis=-2)


def eps_prediction(
    concept: GaussianMixtureConcept, x_t: np.ndarray, alpha_bar: float
) -> np.ndarray:
    """Exact noise prediction implied by the analytic score:
    eps = -sqrt(1 - alpha_bar) * grad log p_t(x_t). Zero at alpha_bar = 1."""
    ab = _check_alpha_bar(alpha_bar)
    if ab == 1.0:
        return np.zeros_like(np.asarray(x_t, dtype=np.float64))
    return -math.sqrt(1.0 - ab) * score_gradient(concept, x_t, ab)


def ddim_reverse_step(
    x_t: np.ndarray,
    eps_hat: np.ndarray,
    schedule: DiffusionSchedule,
    i: int,
    eta: float,
    noise: Optional[np.ndarray] = None,
) -> np.ndarray:
    """One DDIM update from inference step i to its successor:

        x_prev = sqrt(ab_prev) * x0_hat
               + sqrt(1 - ab_prev - eta^2 * var) * eps_hat
               + eta * sqrt(var) * noise

    with x0_hat extrapolated from (x_t, eps_hat). eta = 0 is deterministic
    and ignores `noise`; otherwise noise must be standard normal draws of
    x_t's shape.
    """
    if not (isinstance(eta, (int, float)) and math.isfinite(eta) and 0.0 <= eta <= 1.0):
        raise ValueError("eta must lie in [0, 1]")
    x_t = np.asarray(x_t, dtype=np.float64)
    eps_hat = np.asarray(eps_hat, dtype=np.float64)
    if x_t.shape != eps_hat.shape:
        raise ValueError(f"shape mismatch: x_t {x_t.shape} vs eps_hat {eps_hat.shape}")
    ab_t = alpha_bar_at(schedule, i)
    ab_prev = prev_alpha_bar_at(schedule, i)
    var = step_variance(schedule, i)
    x0_hat = predict_x0(x_t, eps_hat, ab_t)
    # Rounding can push the direction term's radicand a hair below zero.
    direction = math.sqrt(max(1.0 - ab_prev - eta * eta * var, 0.0))
    x_prev = math.sqrt(ab_prev) * x0_hat + direction * eps_hat
    if eta > 0.0:
        if noise is None:
            raise ValueError("eta > 0 requires noise draws")
        noise = np.asarray(noise, dtype=np.float64)
        if noise.shape != x_t.shape:
            raise ValueError(f"noise shape {noise.shape} does not match x_t {x_t.shape}")
        x_prev = x_prev + eta * math.sqrt(var) * noise
    return x_prev


def alignment_score(concept: GaussianMixtureConcept, x0: np.ndarray) -> np.ndarray:
    """Peak-normalized density of x0 under the concept, in (0, 1].

    The normalizer is the mixture density's maximum over the component means,
    so a sample sitting on the strongest mode scores exactly 1. Accepts a
    single point (d,) -> scalar array, or a batch (..., d) -> (...).
    """
    log_peak = float(mixture_log_density(concept, concept.means).max())
    return np.exp(mixture_log_density(concept, x0) - log_peak)


@dataclass(frozen=True)
class ToyRunConfig:
    """Toy generation settings: the concepts to blend, the schedule, how many
    points evolve per seed, and the DDIM stochasticity eta."""

    concepts: tuple[GaussianMixtureConcept, ...]
    schedule: DiffusionSchedule
    samples_per_seed: int = 8
    eta: float = 0.0

    def __post_init__(self):
        if len(self.concepts) < 2:
            raise ValueError("need at least 2 concepts to blend")
        dims = {c.dim for c in self.concepts}
        if len(dims) != 1:
            raise ValueError("all concepts must share a dimension")
        if not (isinstance(self.samples_per_seed, int) and self.samples_per_seed >= 1):
            raise ValueError("samples_per_seed must be an integer >= 1")
        if not (isinstance(self.eta, (int, float)) and math.isfinite(self.eta) and 0.0 <= self.eta <= 1.0):
            raise ValueError("eta must lie in [0, 1]")

    @property
    def dim(self) -> int:
        return self.concepts[0].dim


class ToyEnvironment:
    """ScoreEnvironment that runs the analytic reverse process.

    Each step denoises the batch under the requested conditioning (a concept's
    exact eps, or the equal-weight mean of all concepts' eps for the combined
    concept), then scores the clean-sample forecast extrapolated from the new
    state against every concept; the per-concept raw score is the batch mean
    alignment. Noise for the stochastic step is drawn every step so seeded
    runs stay aligned across strategies.
    """

    def __init__(self, cfg: ToyRunConfig):
        self.cfg = cfg
        self.num_prompts = len(cfg.concepts)
        self._x: Optional[np.ndarray] = None
        self._rng: Optional[np.random.Generator] = None
        self._last_raw: Optional[np.ndarray] = None

    def begin(self, rng: np.random.Generator) -> None:
        self._rng = rng
        self._x = rng.standard_normal((self.cfg.samples_per_seed, self.cfg.dim))
        self._last_raw = None

    def _eps(self, conditioning: Conditioning, x: np.ndarray, alpha_bar: float) -> np.ndarray:
        if conditioning is None:
            preds = [eps_prediction(c, x, alpha_bar) for c in self.cfg.concepts]
            return np.mean(preds, axis=0)
        return eps_prediction(self.cfg.concepts[conditioning], x, alpha_bar)

    def step(self, index: int, conditioning: Conditioning) -> np.ndarray:
        if self._x is None or self._rng is None:
            raise RuntimeError("begin() must run before step()")
        schedule = self.cfg.schedule
        ab_t = alpha_bar_at(schedule, index)
        ab_prev = prev_alpha_bar_at(schedule, index)
        eps_hat = self._eps(conditioning, self._x, ab_t)
        noise = self._rng.standard_normal(self._x.shape)
        self._x = ddim_reverse_step(self._x, eps_hat, schedule, index, self.cfg.eta, noise)
        forecast = predict_x0(self._x, self._eps(conditioning, self._x, ab_prev), ab_prev)
        raw = np.array(
            [float(np.mean(alignment_score(c, forecast))) for c in self.cfg.concepts]
        )
        self._last_raw = raw
        return raw

    def final_scores(self) -> np.ndarray:
        if self._last_raw is None:
            raise RuntimeError("no steps have run")
        return self._last_raw.copy()

    @property
    def samples(self) -> np.ndarray:
        if self._x is None:
            raise RuntimeError("begin() must run before reading samples")
        return self._x.copy()


def generate(
    cfg: ToyRunConfig,
    strategy: Strategy,
    mixer_cfg: MixerConfig,
    seed: int,
) -> tuple[Trace, np.ndarray]:
    """Run the reverse process from standard-normal initial points under a
    strategy. Returns the trace and the final samples (samples_per_seed, d).
    The last inference step pins alpha_bar_prev to 1, so the returned samples
    are the clean extrapolation exactly."""
    env = ToyEnvironment(cfg)
    trace = run_strategy(env, strategy, mixer_cfg, cfg.schedule, seed)
    return trace, env.samples
