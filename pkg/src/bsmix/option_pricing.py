"""European call pricing: closed form with analytic degenerate limits.

The closed-form price is the scoring primitive for the prompt-selection
controller; the Monte Carlo estimator exists so the formula can be checked
against an independent computation of the same expectation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "OptionParams",
    "PricingResult",
    "std_normal_cdf",
    "bs_d_terms",
    "bs_call_price",
    "mc_call_price",
]

_SQRT2 = math.sqrt(2.0)

# Beyond this standardized distance, plain terminal-price sampling leaves the
# payoff region under-covered and the sample standard error stops being an
# honest scale for the estimation error (heavy lognormal tail, or exercise
# events too rare to hit). See mc_call_price.
_SHIFT_THRESHOLD = 1.5


def std_normal_cdf(x: float) -> float:
    """Cumulative distribution function of the standard normal.

    Computed from the complementary error function, which keeps the absolute
    error comfortably below 1e-12 across the whole real line. ``+inf`` and
    ``-inf`` are accepted and map to 1 and 0.
    """
    if math.isnan(x):
        raise ValueError("std_normal_cdf: x must not be NaN")
    return 0.5 * math.erfc(-x / _SQRT2)


@dataclass(frozen=True)
class OptionParams:
    """Inputs to a European call valuation.

    spot, strike, vol and tte must be finite and nonnegative; rate may be any
    finite real. Zero values are legal here -- bs_call_price resolves them as
    analytic limits, while bs_d_terms rejects them.
    """

    spot: float
    strike: float
    rate: float
    vol: float
    tte: float

    def __post_init__(self):
        for name in ("spot", "strike", "rate", "vol", "tte"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ValueError(f"OptionParams.{name} must be a real number")
            if not math.isfinite(value):
                raise ValueError(f"OptionParams.{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        for name in ("spot", "strike", "vol", "tte"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"OptionParams.{name} must be >= 0")


@dataclass(frozen=True)
class PricingResult:
    """Call value plus the d-terms that produced it.

    For degenerate inputs the d-terms are the analytic limits (+/-inf, or 0
    exactly at the forward at-the-money point), chosen so that
    price = spot*N(d1) - strike*exp(-rate*tte)*N(d2) still holds.
    """

    price: float
    d1: float
    d2: float


def bs_d_terms(params: OptionParams) -> tuple[float, float]:
    """The standardized log-moneyness terms of the call formula.

    Requires strictly positive spot, strike, vol and tte; zero values make the
    terms undefined and are rejected. Callers holding a degenerate input want
    bs_call_price, which resolves those cases as analytic limits.
    """
    p = params
    if p.spot <= 0.0 or p.strike <= 0.0 or p.vol <= 0.0 or p.tte <= 0.0:
        raise ValueError(
            "bs_d_terms requires spot, strike, vol and tte all > 0; "
            "degenerate inputs are priced by the limit handling in bs_call_price"
        )
    sig = p.vol * math.sqrt(p.tte)
    d1 = (math.log(p.spot / p.strike) + (p.rate + 0.5 * p.vol * p.vol) * p.tte) / sig
    d2 = d1 - sig
    return d1, d2


def bs_call_price(params: OptionParams) -> PricingResult:
    """Value of a European call, with degenerate inputs priced as limits.

    Limits: tte=0 -> max(spot-strike, 0); vol=0 -> max(spot - strike*disc, 0);
    strike=0 -> spot; spot=0 -> 0 (disc = exp(-rate*tte)). The generic result
    is clipped into the no-arbitrage band [max(0, spot - strike*disc), spot],
    which the exact value satisfies but last-ulp rounding can leave.
    """
    p = params
    disc = math.exp(-p.rate * p.tte)
    if p.spot == 0.0:
        return PricingResult(0.0, -math.inf, -math.inf)
    if p.strike == 0.0:
        return PricingResult(p.spot, math.inf, math.inf)
    if p.tte == 0.0 or p.vol == 0.0:
        forward_gap = p.spot - p.strike * disc
        if forward_gap > 0.0:
            d = math.inf
        elif forward_gap < 0.0:
            d = -math.inf
        else:
            d = 0.0
        return PricingResult(max(forward_gap, 0.0), d, d)
    d1, d2 = bs_d_terms(p)
    price = p.spot * std_normal_cdf(d1) - p.strike * disc * std_normal_cdf(d2)
    lower = max(p.spot - p.strike * disc, 0.0)
    price = min(max(price, lower), p.spot)
    return PricingResult(price, d1, d2)


def mc_call_price(params: OptionParams, paths: int, seed: int) -> tuple[float, float]:
    """Monte Carlo estimate of the discounted call payoff and its stderr.

    Terminal prices follow spot*exp((rate - vol^2/2)*tte + vol*sqrt(tte)*Z)
    with Z standard normal. When the payoff region sits far from the sampling
    bulk (total log-vol or standardized moneyness beyond 1.5), Z is drawn from
    N(theta, 1) instead and every payoff is weighted by the exact likelihood
    ratio exp(-theta*Z + theta^2/2); the estimator stays unbiased for the same
    expectation and the reported stderr stays meaningful. Deterministic for a
    fixed seed. vol=0 or tte=0 collapse to the deterministic payoff with
    stderr 0.
    """
    if not isinstance(paths, int) or isinstance(paths, bool) or paths < 1:
        raise ValueError("mc_call_price: paths must be a positive integer")
    p = params
    disc = math.exp(-p.rate * p.tte)
    if p.spot == 0.0:
        return 0.0, 0.0
    total_vol = p.vol * math.sqrt(p.tte)
    if total_vol == 0.0:
        estimate = max(p.spot * math.exp(p.rate * p.tte) - p.strike, 0.0) * disc
        return estimate, 0.0
    drift = (p.rate - 0.5 * p.vol * p.vol) * p.tte
    theta = 0.0
    if p.strike > 0.0:
        boundary = (math.log(p.strike / p.spot) - drift) / total_vol
    else:
        boundary = -math.inf
    if total_vol > _SHIFT_THRESHOLD or boundary > _SHIFT_THRESHOLD:
        theta = max(total_vol, boundary)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(paths) + theta
    payoffs = np.maximum(p.spot * np.exp(drift + total_vol * z) - p.strike, 0.0)
    weights = np.exp(-theta * z + 0.5 * theta * theta)
    samples = disc * payoffs * weights
    estimate = float(samples.mean())
    if paths > 1:
        stderr = float(samples.std(ddof=1) / math.sqrt(paths))
    else:
        stderr = 0.0
    return estimate, stderr
