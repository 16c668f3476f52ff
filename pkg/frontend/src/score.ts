/** Review scoring: the client-side twin of the server's formula.
 *
 * score = (S1 + S2 + S3 + S4 + S5) * (R1 + R2) / 2, range [0, 5].
 * A contract test replays all 128 assignments against the API to prove the
 * two sides agree bit for bit.
 */

export const CRITERIA = ["s1", "s2", "s3", "s4", "s5", "r1", "r2"] as const;
export type Criterion = (typeof CRITERIA)[number];
export type Bit = 0 | 1;
export type Toggles = Record<Criterion, Bit | null>;

export const ACCEPTANCE_THRESHOLD = 2.5;

export const CRITERION_TEXT: Record<Criterion, string> = {
  s1: "The number of scenarios recorded is correct.",
  s2: "The field specified in the scenario exists.",
  s3: "The resulting compliance status is possible.",
  s4: "The configuration of the resource specified by the scenario is possible.",
  s5: "The conclusion of the scenario is correct.",
  r1: "The rule name correctly describes the control specified by the collection of scenarios.",
  r2: "The description correctly describes the control specified by the collection of scenarios.",
};

export function emptyToggles(): Toggles {
  return { s1: null, s2: null, s3: null, s4: null, s5: null, r1: null, r2: null };
}

export function allSet(toggles: Toggles): boolean {
  return CRITERIA.every((c) => toggles[c] !== null);
}

/** Live score, or null while any criterion is unset. */
export function scoreOf(toggles: Toggles): number | null {
  if (!allSet(toggles)) return null;
  const scenarioSum =
    toggles.s1! + toggles.s2! + toggles.s3! + toggles.s4! + toggles.s5!;
  const ruleAvg = (toggles.r1! + toggles.r2!) / 2;
  return scenarioSum * ruleAvg;
}

export type Decision = "Accepted" | "Rejected" | "NeedsRevision";

/** What submitting right now would decide (threshold is >= 2.5). */
export function decisionPreview(
  score: number | null,
  needsRevision = false,
): Decision | "incomplete" {
  if (score === null) return "incomplete";
  if (score >= ACCEPTANCE_THRESHOLD) {
    return needsRevision ? "NeedsRevision" : "Accepted";
  }
  return "Rejected";
}

export function formatScore(score: number | null): string {
  if (score === null) return "–";
  return Number.isInteger(score) ? score.toFixed(1) : String(score);
}
