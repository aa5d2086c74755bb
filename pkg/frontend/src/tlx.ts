// NASA TLX form logic: validation and score preview.  The authoritative
// scoring lives core-side; this mirrors it for immediate feedback.

export const SUBSCALES = [
  "mental", "physical", "temporal", "performance", "effort", "frustration",
] as const;

export type Subscale = (typeof SUBSCALES)[number];
export type TlxValues = Partial<Record<Subscale, number | null>>;

export function validateTlx(
  values: TlxValues, scale: [number, number] = [0, 10],
): string[] {
  const errors: string[] = [];
  for (const name of SUBSCALES) {
    const v = values[name];
    if (v === undefined || v === null || Number.isNaN(v)) {
      errors.push(`${name}: required`);
    } else if (v < scale[0] || v > scale[1]) {
      errors.push(`${name}: must be within ${scale[0]}..${scale[1]}`);
    }
  }
  return errors;
}

export function rawScore(values: TlxValues): number {
  let sum = 0;
  for (const name of SUBSCALES) sum += values[name] ?? 0;
  return sum / SUBSCALES.length;
}

// toFixed alone mis-rounds exact decimal halves that sit just below the
// half point in binary (1.555 -> "1.55"); nudge before rounding
export function formatScore(x: number, digits = 2): string {
  return (x + 1e-9).toFixed(digits);
}

export function weightedScore(
  values: TlxValues, weights: Partial<Record<Subscale, number>> | null,
): number | null {
  if (!weights) return null;
  let total = 0;
  let sum = 0;
  for (const name of SUBSCALES) {
    const w = weights[name];
    if (w === undefined) return null;
    total += w;
    sum += (values[name] ?? 0) * w;
  }
  if (Math.abs(total - 15) > 1e-9) return null;
  return sum / 15;
}
