/**
 * SVG chart builders fed directly by service payloads.
 *
 * Each rendered element keeps a `chartData` property pointing at the
 * exact payload object it was drawn from, so the displayed data can be
 * spot-checked for equality with the API response at any time. Builders
 * read the payloads; they never copy or modify them.
 */
import { fmt3 } from "./format.js";
import type { CorrelationReport, EcdfCurve, KdeCurve } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

/** An element annotated with the payload it renders. */
export type ChartElement<T> = SVGElement & { chartData: T };

function svgElement<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    el.setAttribute(key, value);
  }
  return el;
}

function withData<T, E extends SVGElement>(el: E, data: T): E & { chartData: T } {
  (el as E & { chartData: T }).chartData = data;
  return el as E & { chartData: T };
}

interface Range {
  lo: number;
  hi: number;
}

function rangeOf(values: Iterable<number>): Range {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!Number.isFinite(lo)) return { lo: 0, hi: 1 };
  if (lo === hi) return { lo: lo - 0.5, hi: hi + 0.5 };
  return { lo, hi };
}

function scaleTo(range: Range, outLo: number, outHi: number): (v: number) => number {
  const span = range.hi - range.lo;
  return (v) => outLo + ((v - range.lo) / span) * (outHi - outLo);
}

export interface EcdfSeries {
  label: string;
  curve: EcdfCurve;
  color: string;
}

/** Step path through (value, probability) points, starting from p = 0. */
export function ecdfStepPath(
  curve: EcdfCurve,
  x: (v: number) => number,
  y: (p: number) => number,
): string {
  const parts: string[] = [];
  let lastY = y(0);
  curve.values.forEach((value, i) => {
    const px = x(value);
    const py = y(curve.probabilities[i] as number);
    parts.push(i === 0 ? `M ${px} ${lastY}` : `H ${px}`);
    parts.push(`V ${py}`);
    lastY = py;
  });
  return parts.join(" ");
}

export function renderEcdfOverlay(
  series: EcdfSeries[],
  width = 320,
  height = 160,
): SVGSVGElement {
  const svg = svgElement("svg", {
    viewBox: `0 0 ${width} ${height}`,
    class: "chart chart-ecdf",
    role: "img",
  });
  const xRange = rangeOf(series.flatMap((s) => s.curve.values));
  const x = scaleTo(xRange, 8, width - 8);
  const y = scaleTo({ lo: 0, hi: 1 }, height - 8, 8);
  for (const { label, curve, color } of series) {
    const path = withData(
      svgElement("path", {
        d: ecdfStepPath(curve, x, y),
        fill: "none",
        stroke: color,
        "stroke-width": "1.5",
        class: "ecdf-curve",
        "data-label": label,
        "data-n": String(curve.values.length),
      }),
      curve,
    );
    svg.append(path);
  }
  return svg;
}

export interface ScatterSeries {
  label: string;
  points: [number, number][];
  color: string;
}

export function renderScatter(
  series: ScatterSeries[],
  width = 220,
  height = 220,
): SVGSVGElement {
  const svg = svgElement("svg", {
    viewBox: `0 0 ${width} ${height}`,
    class: "chart chart-scatter",
    role: "img",
  });
  const all = series.flatMap((s) => s.points);
  const x = scaleTo(rangeOf(all.map((p) => p[0])), 8, width - 8);
  const y = scaleTo(rangeOf(all.map((p) => p[1])), height - 8, 8);
  for (const { label, points, color } of series) {
    const group = withData(
      svgElement("g", { class: "scatter-series", "data-label": label }),
      points,
    );
    for (const [px, py] of points) {
      group.append(
        svgElement("circle", {
          cx: String(x(px)),
          cy: String(y(py)),
          r: "3",
          fill: color,
          "fill-opacity": "0.75",
          "data-x": String(px),
          "data-y": String(py),
        }),
      );
    }
    svg.append(group);
  }
  return svg;
}

export function renderKde(curve: KdeCurve, color: string, width = 320, height = 120): SVGSVGElement {
  const svg = svgElement("svg", {
    viewBox: `0 0 ${width} ${height}`,
    class: "chart chart-kde",
    role: "img",
  });
  const x = scaleTo(rangeOf(curve.grid), 8, width - 8);
  const y = scaleTo(rangeOf(curve.density), height - 8, 8);
  const points = curve.grid
    .map((g, i) => `${x(g)},${y(curve.density[i] as number)}`)
    .join(" ");
  svg.append(
    withData(
      svgElement("polyline", {
        points,
        fill: "none",
        stroke: color,
        "stroke-width": "1.5",
        class: "kde-curve",
      }),
      curve,
    ),
  );
  return svg;
}

/** Blue for negative, white near zero, red for positive correlation. */
export function heatColor(r: number): string {
  const clamped = Math.max(-1, Math.min(1, r));
  const intensity = Math.round(Math.abs(clamped) * 160);
  return clamped >= 0
    ? `rgb(255, ${255 - intensity}, ${255 - intensity})`
    : `rgb(${255 - intensity}, ${255 - intensity}, 255)`;
}

/**
 * Correlation heat-map table. Cell text is the coefficient to three
 * decimals, straight from the report matrix; clicking an off-diagonal
 * cell reports the pair to the caller.
 */
export function renderHeatmap(
  report: CorrelationReport,
  onPick: (a: string, b: string) => void,
): HTMLTableElement {
  const table = document.createElement("table");
  table.className = "heatmap";
  (table as HTMLTableElement & { chartData: CorrelationReport }).chartData = report;
  const header = document.createElement("tr");
  header.append(document.createElement("th"));
  for (const name of report.names) {
    const th = document.createElement("th");
    th.textContent = name;
    header.append(th);
  }
  table.append(header);
  report.names.forEach((rowName, i) => {
    const tr = document.createElement("tr");
    const th = document.createElement("th");
    th.textContent = rowName;
    tr.append(th);
    report.names.forEach((colName, j) => {
      const td = document.createElement("td");
      td.className = "heat-cell";
      const value = (report.matrix[i] as (number | null)[])[j] as number | null;
      if (value === null) {
        td.textContent = "n/a";
        td.dataset.value = "";
      } else {
        td.textContent = fmt3(value);
        td.dataset.value = String(value);
        td.style.backgroundColor = heatColor(value);
      }
      td.dataset.row = rowName;
      td.dataset.col = colName;
      td.title = `${rowName} vs ${colName}`;
      if (i !== j) {
        td.classList.add("heat-cell-pick");
        td.addEventListener("click", () => onPick(rowName, colName));
      }
      tr.append(td);
    });
    table.append(tr);
  });
  return table;
}
