import { beforeEach, describe, expect, it } from "vitest";

import { cvmBadgeClass, fmt3 } from "../src/format.js";
import { SessionState } from "../src/state.js";
import type { SweepEntryDoc, SweepReportDoc } from "../src/types.js";
import { renderPanels } from "../src/views/panels.js";
import { deepFreeze, fixtures } from "./helpers/fixtures.js";

function loadedState(): SessionState {
  const state = new SessionState();
  state.loadReport("sweep-1", fixtures.sweepReport());
  return state;
}

function badgeByPair(root: ParentNode, scope: string, pair: string): HTMLElement {
  const el = root.querySelector(`${scope} .badge[data-pair="${pair}"]`);
  expect(el).not.toBeNull();
  return el as HTMLElement;
}

describe("tolerance panels", () => {
  let container: HTMLElement;

  beforeEach(() => {
    container = document.createElement("div");
    document.body.append(container);
  });

  it("asks for a sweep before a report is loaded", () => {
    renderPanels(container, { state: new SessionState() });
    expect(container.querySelector(".empty-note")?.textContent).toContain("Run a sweep");
  });

  it("renders one tab per tau plus the unconstrained tab", () => {
    const state = loadedState();
    renderPanels(container, { state });
    const tabs = container.querySelectorAll("button.tab");
    // six swept tolerances and the unconstrained solve
    expect(tabs.length).toBe(7);
    const labels = Array.from(tabs).map((tab) => tab.textContent);
    expect(labels).toEqual([
      "tau 0.05",
      "tau 0.10",
      "tau 0.15",
      "tau 0.20",
      "tau 0.25",
      "tau 0.30",
      "unconstrained",
    ]);
  });

  it("keeps the baseline panel visible whichever tab is active", () => {
    const state = loadedState();
    const report = state.report as SweepReportDoc;
    const view = renderPanels(container, { state });
    for (const tau of [...report.taus, null]) {
      view.show(tau);
      const baseline = container.querySelector(".baseline-panel");
      expect(baseline).not.toBeNull();
      for (const [pair, value] of Object.entries(report.baseline)) {
        const badge = badgeByPair(container, ".baseline-panel", pair);
        expect(badge.textContent).toBe(`${pair}: ${fmt3(value)}`);
      }
    }
  });

  it("shows each pair's CvM exactly as the report states it, colored by the 1.0 rule", () => {
    const state = loadedState();
    const report = state.report as SweepReportDoc;
    const view = renderPanels(container, { state });
    const entriesByTau: [number | null, SweepEntryDoc][] = [
      ...report.entries.map((entry) => [entry.tau, entry] as [number | null, SweepEntryDoc]),
      [null, report.unconstrained],
    ];
    for (const [tau, entry] of entriesByTau) {
      view.show(tau);
      for (const [pair, value] of Object.entries(entry.cvm_by_pair)) {
        const badge = badgeByPair(container, ".tau-panel", pair);
        // three-decimal display of the payload value, no recomputation
        expect(badge.textContent).toBe(`${pair}: ${fmt3(value)}`);
        expect(Number(badge.dataset.value)).toBe(value);
        expect(badge.classList.contains(cvmBadgeClass(value))).toBe(true);
      }
    }
  });

  it("draws the scatter and ECDF panels from the exact payload arrays", () => {
    const state = loadedState();
    const report = state.report as SweepReportDoc;
    const view = renderPanels(container, { state });
    const entry = report.entries[0] as SweepEntryDoc;
    view.show(entry.tau);

    const scatterGroups = container.querySelectorAll(".chart-scatter g.scatter-series");
    const byLabel = new Map(
      Array.from(scatterGroups).map((g) => [
        `${(g.parentElement?.previousElementSibling?.textContent ?? "").trim()}|${g.getAttribute("data-label")}`,
        g as SVGGElement & { chartData: unknown },
      ]),
    );
    for (const [pair, scatter] of Object.entries(entry.scatter)) {
      expect(byLabel.get(`${pair} scatter|initial`)?.chartData).toBe(scatter.initial);
      expect(byLabel.get(`${pair} scatter|optimized`)?.chartData).toBe(scatter.optimized);
    }

    const curves = container.querySelectorAll(".tau-panel path.ecdf-curve");
    const curveData = new Set(
      Array.from(curves).map((c) => (c as SVGPathElement & { chartData: unknown }).chartData),
    );
    for (const curvePair of Object.values(entry.ecdf)) {
      expect(curveData.has(curvePair.initial)).toBe(true);
      expect(curveData.has(curvePair.optimized)).toBe(true);
    }
  });

  it("tabulates the quantile picks for the active entry", () => {
    const state = loadedState();
    const report = state.report as SweepReportDoc;
    renderPanels(container, { state });
    const entry = report.entries[0] as SweepEntryDoc;
    const rows = container.querySelectorAll(".quantile-table tr[data-level]");
    expect(rows.length).toBe(entry.quantiles?.levels.length);
    const first = rows[0] as HTMLTableRowElement;
    expect(first.dataset.level).toBe(String(entry.quantiles?.levels[0]));
    expect(first.cells[1]?.textContent).toBe(fmt3(entry.quantiles?.picks[0]?.te_pred as number));
  });

  it("flags a drifting configuration red once CvM reaches 1.0", () => {
    // hand-built mini report: the real sweep fixture is all-green
    const entry = (tau: number | null, label: string, cvm: number): SweepEntryDoc => ({
      label,
      tau,
      records: [],
      cvm_by_pair: { "A|B": cvm },
      marginal_shift: {},
      quantiles: null,
      errors: [],
      ecdf: {},
      scatter: {},
    });
    const report: SweepReportDoc = deepFreeze({
      schema_version: 1,
      taus: [0.05],
      chain_features: ["A", "B"],
      baseline: { "A|B": 0.11 },
      unconstrained: entry(null, "unconstrained", 30.188),
      entries: [entry(0.05, "tau=0.05", 0.134)],
      train_job: "t",
      dataset_id: "d",
      feature_names: ["A", "B"],
      feature_units: ["unitless", "unitless"],
    });
    const state = new SessionState();
    state.loadReport("sweep-x", report);
    const view = renderPanels(container, { state });

    view.show(0.05);
    expect(badgeByPair(container, ".tau-panel", "A|B").classList.contains("badge-green")).toBe(true);
    view.show(null);
    expect(badgeByPair(container, ".tau-panel", "A|B").classList.contains("badge-red")).toBe(true);
    expect(badgeByPair(container, ".baseline-panel", "A|B").classList.contains("badge-green")).toBe(
      true,
    );
  });

  it("switches panels by clicking the tabs", () => {
    const state = loadedState();
    renderPanels(container, { state });
    const unconstrainedTab = container.querySelector('button.tab[data-tau="null"]') as HTMLButtonElement;
    unconstrainedTab.click();
    expect(state.selectedTau).toBeNull();
    expect(unconstrainedTab.classList.contains("tab-active")).toBe(true);
    expect(container.querySelector(".tau-panel h3")?.textContent).toBe("unconstrained");
  });
});
