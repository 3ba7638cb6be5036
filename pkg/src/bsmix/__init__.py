"""Option-value-guided prompt selection for diffusion-style sampling.

The controller treats each prompt's alignment score as the spot price of a
European call (shared strike, rate from the step budget, volatility from the
noise schedule, expiry at the end of sampling) and conditions each denoising
step on the prompt whose option is cheapest. Two desk environments -- a score
simulator and an analytic 2-D toy diffusion -- exercise the controller against
baseline policies end to end.
"""

from .ddim_schedule import (
    SIGMA_FLOOR,
    DiffusionSchedule,
    ScheduleConfig,
    build_schedule,
    predict_x0,
    sigma_at,
    step_variance,
    time_to_expiry,
)
from .metrics import RunSummary, aggregate, balance, combined, selection_entropy, selection_histogram
from .mixer import (
    COMBINED,
    MixerConfig,
    StepDecision,
    Strategy,
    Trace,
    bs_scores,
    calibrate_strike,
    choose_alternating,
    choose_black_scholes,
    choose_clip_min,
    choose_stepwise,
    run_strategy,
)
from .option_pricing import OptionParams, PricingResult, bs_call_price, bs_d_terms, mc_call_price, std_normal_cdf
from .score_sim import SimEnvConfig, SimEnvironment, run_tournament, sim_step
from .toy_diffusion import (
    GaussianMixtureConcept,
    ToyEnvironment,
    ToyRunConfig,
    alignment_score,
    ddim_reverse_step,
    diffused_mixture,
    eps_prediction,
    generate,
    score_gradient,
)

__version__ = "0.1.0"

__all__ = [
    "SIGMA_FLOOR",
    "COMBINED",
    "DiffusionSchedule",
    "GaussianMixtureConcept",
    "MixerConfig",
    "OptionParams",
    "PricingResult",
    "RunSummary",
    "ScheduleConfig",
    "SimEnvConfig",
    "SimEnvironment",
    "StepDecision",
    "Strategy",
    "ToyEnvironment",
    "ToyRunConfig",
    "Trace",
    "aggregate",
    "alignment_score",
    "balance",
    "bs_call_price",
    "bs_d_terms",
    "bs_scores",
    "build_schedule",
    "calibrate_strike",
    "choose_alternating",
    "choose_black_scholes",
    "choose_clip_min",
    "choose_stepwise",
    "combined",
    "ddim_reverse_step",
    "diffused_mixture",
    "eps_prediction",
    "generate",
    "mc_call_price",
    "predict_x0",
    "run_strategy",
    "run_tournament",
    "score_gradient",
    "selection_entropy",
    "selection_histogram",
    "sigma_at",
    "sim_step",
    "std_normal_cdf",
    "step_variance",
    "time_to_expiry",
]
