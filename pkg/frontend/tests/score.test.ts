import { describe, expect, it } from "vitest";

import {
  ACCEPTANCE_THRESHOLD,
  CRITERIA,
  type Bit,
  type Toggles,
  decisionPreview,
  emptyToggles,
  formatScore,
  scoreOf,
} from "../src/score.js";

function togglesFromBits(bits: Bit[]): Toggles {
  const toggles = emptyToggles();
  CRITERIA.forEach((criterion, i) => {
    toggles[criterion] = bits[i];
  });
  return toggles;
}

function bruteForce(bits: Bit[]): number {
  const [s1, s2, s3, s4, s5, r1, r2] = bits;
  return (s1 + s2 + s3 + s4 + s5) * ((r1 + r2) / 2);
}

function* allAssignments(): Generator<Bit[]> {
  for (let mask = 0; mask < 128; mask++) {
    yield CRITERIA.map((_, i) => ((mask >> i) & 1) as Bit);
  }
}

describe("scoreOf", () => {
  it("matches the brute-force formula on all 128 assignments", () => {
    let count = 0;
    for (const bits of allAssignments()) {
      const score = scoreOf(togglesFromBits(bits));
      expect(score).toBe(bruteForce(bits));
      expect(score).toBeGreaterThanOrEqual(0);
      expect(score).toBeLessThanOrEqual(5);
      count++;
    }
    expect(count).toBe(128);
  });

  it("is null while any criterion is unset", () => {
    const toggles = togglesFromBits([1, 1, 1, 1, 1, 1, 1]);
    toggles.r2 = null;
    expect(scoreOf(toggles)).toBeNull();
    expect(scoreOf(emptyToggles())).toBeNull();
  });

  it("is zero whenever both rule criteria fail", () => {
    const toggles = togglesFromBits([1, 1, 1, 1, 1, 0, 0]);
    expect(scoreOf(toggles)).toBe(0);
  });
});

describe("decisionPreview", () => {
  it("accepts exactly at the 2.5 boundary", () => {
    const boundary = scoreOf(togglesFromBits([1, 1, 1, 1, 1, 1, 0]));
    expect(boundary).toBe(ACCEPTANCE_THRESHOLD);
    expect(decisionPreview(boundary)).toBe("Accepted");
  });

  it("rejects below the boundary", () => {
    expect(decisionPreview(2.0)).toBe("Rejected");
  });

  it("reports incomplete while unset", () => {
    expect(decisionPreview(null)).toBe("incomplete");
  });

  it("honors the needs-revision request only at/above the boundary", () => {
    expect(decisionPreview(2.5, true)).toBe("NeedsRevision");
    expect(decisionPreview(2.0, true)).toBe("Rejected");
  });
});

describe("formatScore", () => {
  it("renders whole scores with one decimal", () => {
    expect(formatScore(5)).toBe("5.0");
    expect(formatScore(2.5)).toBe("2.5");
    expect(formatScore(null)).toBe("–");
  });
});
