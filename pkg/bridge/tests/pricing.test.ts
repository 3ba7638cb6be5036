import { describe, expect, it } from "vitest";

import { argminLowestIndex, bsScores, callPrice, stdNormalCdf } from "../src/pricing.js";

// Frozen from the controller's own pricing CLI (`bsmix price --json`), the
// independent side of the differential contract. TS and host agree far
// tighter than this in practice (~1e-13); 1e-9 is the wire tolerance.
const HOST_PRICES: Array<[number, number, number, number, number, number]> = [
  [100, 100, 0.05, 0.2, 1, 10.450583572185565],
  [30, 25, 0.02, 0.35, 49, 26.53664327684597],
  [5, 25, 0.01, 0.1, 4, 5.734943030056861e-16],
  [95, 25, 0.01, 0.85, 100, 94.99938948332913],
  [25, 25, 0.0, 0.3, 2, 4.19989928568409],
];

describe("stdNormalCdf", () => {
  it("is exactly one half at zero", () => {
    expect(stdNormalCdf(0)).toBe(0.5);
  });

  it("satisfies the complement identity", () => {
    for (const x of [0.1, 0.7, 1.3, 2.9, 4.5, 7.0]) {
      expect(stdNormalCdf(x) + stdNormalCdf(-x)).toBeCloseTo(1, 12);
    }
  });

  it("maps the infinities to the distribution's range ends", () => {
    expect(stdNormalCdf(Number.POSITIVE_INFINITY)).toBe(1);
    expect(stdNormalCdf(Number.NEGATIVE_INFINITY)).toBe(0);
  });

  it("rejects NaN", () => {
    expect(() => stdNormalCdf(Number.NaN)).toThrow(RangeError);
  });
});

describe("callPrice", () => {
  it("prices expiry as intrinsic value", () => {
    expect(callPrice({ spot: 30, strike: 25, rate: 0.02, vol: 0.4, tte: 0 })).toBe(5);
    expect(callPrice({ spot: 20, strike: 25, rate: 0.02, vol: 0.4, tte: 0 })).toBe(0);
  });

  it("prices zero volatility as the discounted forward gap", () => {
    const expected = Math.max(100 - 90 * Math.exp(-0.03 * 2), 0);
    expect(callPrice({ spot: 100, strike: 90, rate: 0.03, vol: 0, tte: 2 })).toBe(expected);
    expect(callPrice({ spot: 10, strike: 90, rate: 0.03, vol: 0, tte: 2 })).toBe(0);
  });

  it("prices a free strike as the spot and an empty spot as worthless", () => {
    expect(callPrice({ spot: 42.5, strike: 0, rate: -0.1, vol: 0.3, tte: 7 })).toBe(42.5);
    expect(callPrice({ spot: 0, strike: 25, rate: 0.01, vol: 0.3, tte: 7 })).toBe(0);
  });

  it("matches the host controller's pricing on frozen cases", () => {
    for (const [spot, strike, rate, vol, tte, expected] of HOST_PRICES) {
      expect(Math.abs(callPrice({ spot, strike, rate, vol, tte }) - expected)).toBeLessThanOrEqual(1e-9);
    }
  });

  it("stays inside the no-arbitrage band and increases with spot", () => {
    let prev = -1;
    for (let spot = 1; spot <= 100; spot += 3) {
      const price = callPrice({ spot, strike: 25, rate: 0.01, vol: 0.25, tte: 40 });
      const lower = Math.max(spot - 25 * Math.exp(-0.01 * 40), 0);
      expect(price).toBeGreaterThanOrEqual(lower);
      expect(price).toBeLessThanOrEqual(spot);
      expect(price).toBeGreaterThan(prev);
      prev = price;
    }
  });

  it("rejects non-finite and negative inputs", () => {
    expect(() => callPrice({ spot: Number.NaN, strike: 25, rate: 0, vol: 0.1, tte: 1 })).toThrow(RangeError);
    expect(() => callPrice({ spot: 10, strike: 25, rate: Number.POSITIVE_INFINITY, vol: 0.1, tte: 1 })).toThrow(
      RangeError,
    );
    expect(() => callPrice({ spot: -1, strike: 25, rate: 0, vol: 0.1, tte: 1 })).toThrow(RangeError);
    expect(() => callPrice({ spot: 10, strike: 25, rate: 0, vol: -0.1, tte: 1 })).toThrow(RangeError);
  });
});

describe("bsScores / argminLowestIndex", () => {
  it("scales scores onto the spot axis before pricing", () => {
    const [a, b] = bsScores([0.2, 0.3], 0.05, 99, 25, 0.01, 100);
    expect(a).toBe(callPrice({ spot: 20, strike: 25, rate: 0.01, vol: 0.05, tte: 99 }));
    expect(b).toBe(callPrice({ spot: 30, strike: 25, rate: 0.01, vol: 0.05, tte: 99 }));
    expect(a).toBeLessThan(b);
  });

  it("breaks ties toward the lowest index", () => {
    expect(argminLowestIndex([3, 1, 1, 2])).toBe(1);
    expect(argminLowestIndex([5, 5])).toBe(0);
    expect(argminLowestIndex([2])).toBe(0);
  });

  it("rejects an empty score list", () => {
    expect(() => argminLowestIndex([])).toThrow(RangeError);
  });
});
