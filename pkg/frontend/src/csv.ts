/** Minimal CSV column parser for locally uploaded datasets. */

/**
 * Parse a plain numeric CSV (header row + one row per sample) into
 * per-variable columns. Used only to draw pair scatter plots of the
 * dataset the operator just uploaded; all statistics shown next to
 * them come from the service.
 */
export function parseCsvColumns(text: string): Record<string, number[]> {
  const lines = text.split(/\r?\n/).filter((line) => line.trim().length > 0);
  if (lines.length < 2) {
    throw new Error("CSV needs a header row and at least one data row");
  }
  const names = (lines[0] as string).split(",").map((name) => name.trim());
  const columns: Record<string, number[]> = {};
  for (const name of names) columns[name] = [];
  for (const line of lines.slice(1)) {
    const cells = line.split(",");
    if (cells.length !== names.length) {
      throw new Error(`row has ${cells.length} cells, expected ${names.length}`);
    }
    names.forEach((name, i) => {
      const value = Number(cells[i]);
      if (!Number.isFinite(value)) {
        throw new Error(`non-numeric cell in column ${name}: ${cells[i]}`);
      }
      (columns[name] as number[]).push(value);
    });
  }
  return columns;
}

export function pairPoints(
  columns: Record<string, number[]>,
  a: string,
  b: string,
): [number, number][] {
  const xs = columns[a];
  const ys = columns[b];
  if (!xs || !ys) throw new Error(`columns ${a}, ${b} not present in the uploaded CSV`);
  return xs.map((x, i) => [x, ys[i] as number]);
}
