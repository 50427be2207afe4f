/** Display rules shared across views. All numbers shown are pass-through. */

/** Correlation and CvM values are always shown to three decimals. */
export function fmt3(value: number): string {
  return value.toFixed(3);
}

/**
 * A per-pair CvM badge is green when the optimized solutions stay
 * distribution-consistent with history (statistic below 1.0), red above.
 */
export function cvmBadgeClass(value: number): "badge-green" | "badge-red" {
  return value < 1.0 ? "badge-green" : "badge-red";
}

export function tabLabel(tau: number | null): string {
  return tau === null ? "unconstrained" : `tau ${tau.toFixed(2)}`;
}

/** Engineering values keep the sheet's own text when available. */
export function fmtValue(value: number): string {
  return String(value);
}

export function fmtPercent(value: number): string {
  return `${value.toFixed(1)}%`;
}
