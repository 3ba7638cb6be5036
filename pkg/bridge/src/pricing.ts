/**
 * European call valuation for the selection rule.
 *
 * This mirrors the host controller's pricing operation for operation: the
 * same analytic limits for degenerate inputs and the same no-arbitrage
 * clipping of the generic closed form, so responses line up with direct
 * controller calls to within floating-point noise (the differential suite
 * pins 1e-9).
 */

import erfc from "@stdlib/math-base-special-erfc";

const SQRT2 = Math.sqrt(2);

/** Standard normal CDF via the complementary error function. */
export function stdNormalCdf(x: number): number {
  if (Number.isNaN(x)) {
    throw new RangeError("stdNormalCdf: x must not be NaN");
  }
  return 0.5 * erfc(-x / SQRT2);
}

export interface CallParams {
  spot: number;
  strike: number;
  rate: number;
  vol: number;
  tte: number;
}

/**
 * Value of a European call, with degenerate inputs priced as limits.
 *
 * Limits: tte=0 -> max(spot-strike, 0); vol=0 -> max(spot - strike*disc, 0);
 * strike=0 -> spot; spot=0 -> 0 (disc = exp(-rate*tte)). The generic result
 * is clipped into [max(0, spot - strike*disc), spot], which the exact value
 * satisfies but last-ulp rounding can leave.
 */
export function callPrice(p: CallParams): number {
  for (const [name, value] of Object.entries(p)) {
    if (typeof value !== "number" || !Number.isFinite(value)) {
      throw new RangeError(`callPrice: ${name} must be a finite number`);
    }
  }
  if (p.spot < 0 || p.strike < 0 || p.vol < 0 || p.tte < 0) {
    throw new RangeError("callPrice: spot, strike, vol and tte must be >= 0");
  }
  const disc = Math.exp(-p.rate * p.tte);
  if (p.spot === 0) {
    return 0;
  }
  if (p.strike === 0) {
    return p.spot;
  }
  if (p.tte === 0 || p.vol === 0) {
    return Math.max(p.spot - p.strike * disc, 0);
  }
  const sig = p.vol * Math.sqrt(p.tte);
  const d1 = (Math.log(p.spot / p.strike) + (p.rate + 0.5 * p.vol * p.vol) * p.tte) / sig;
  const d2 = d1 - sig;
  const raw = p.spot * stdNormalCdf(d1) - p.strike * disc * stdNormalCdf(d2);
  const lower = Math.max(p.spot - p.strike * disc, 0);
  return Math.min(Math.max(raw, lower), p.spot);
}

/** Call value of each prompt's scaled score under shared option terms. */
export function bsScores(
  scores: readonly number[],
  sigma: number,
  tte: number,
  strike: number,
  rate: number,
  scale: number,
): number[] {
  return scores.map((s) => callPrice({ spot: s * scale, strike, rate, vol: sigma, tte }));
}

/** First index of the smallest value; ties break to the lowest index. */
export function argminLowestIndex(values: readonly number[]): number {
  if (values.length === 0) {
    throw new RangeError("argminLowestIndex: empty input");
  }
  let best = 0;
  for (let i = 1; i < values.length; i++) {
    if (values[i] < values[best]) {
      best = i;
    }
  }
  return best;
}
