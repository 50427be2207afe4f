/** Client-side validation for the sweep launch form. */

/** The grid the tolerance input is prefilled with. */
export function defaultTauGrid(): number[] {
  return [0.05, 0.1, 0.15, 0.2, 0.25, 0.3];
}

export function defaultTauText(): string {
  return defaultTauGrid()
    .map((t) => t.toFixed(2))
    .join(", ");
}

export type TauParse = { ok: true; taus: number[] } | { ok: false; message: string };

/**
 * Parse a comma-separated tolerance list. Rejects non-numbers, anything
 * not strictly positive, and duplicates, so invalid grids never reach
 * the service.
 */
export function parseTauList(text: string): TauParse {
  const parts = text
    .split(",")
    .map((part) => part.trim())
    .filter((part) => part.length > 0);
  if (parts.length === 0) {
    return { ok: false, message: "enter at least one tolerance value" };
  }
  const taus: number[] = [];
  for (const part of parts) {
    const value = Number(part);
    if (!Number.isFinite(value)) {
      return { ok: false, message: `"${part}" is not a number` };
    }
    if (value <= 0) {
      return { ok: false, message: `tolerance must be > 0, got ${part}` };
    }
    taus.push(value);
  }
  if (new Set(taus).size !== taus.length) {
    return { ok: false, message: "tolerance values must be distinct" };
  }
  taus.sort((a, b) => a - b);
  return { ok: true, taus };
}

export type BoundsParse =
  | { ok: true; bounds: [number, number][] | undefined }
  | { ok: false; message: string };

/** Optional bounds field: a JSON array of [low, high] pairs, or blank. */
export function parseBounds(text: string): BoundsParse {
  const trimmed = text.trim();
  if (!trimmed) return { ok: true, bounds: undefined };
  let parsed: unknown;
  try {
    parsed = JSON.parse(trimmed);
  } catch {
    return { ok: false, message: "bounds must be a JSON array of [low, high] pairs" };
  }
  if (!Array.isArray(parsed)) {
    return { ok: false, message: "bounds must be a JSON array of [low, high] pairs" };
  }
  const bounds: [number, number][] = [];
  for (const row of parsed) {
    if (
      !Array.isArray(row) ||
      row.length !== 2 ||
      typeof row[0] !== "number" ||
      typeof row[1] !== "number"
    ) {
      return { ok: false, message: "each bound must be a [low, high] number pair" };
    }
    if (row[1] <= row[0]) {
      return { ok: false, message: `bound [${row[0]}, ${row[1]}] has high <= low` };
    }
    bounds.push([row[0], row[1]]);
  }
  return { ok: true, bounds };
}
