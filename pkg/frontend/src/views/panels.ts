/**
 * Per-tolerance comparison panels.
 *
 * One tab per swept tolerance plus one for the unconstrained solve; the
 * history self-similarity baseline stays visible above the tabs at all
 * times. Each panel shows, per correlated pair, the CvM badge (green
 * below 1.0, red otherwise), the initial-vs-optimized scatter, and the
 * per-feature ECDF overlays, all rendered directly from the report
 * payload the service returned.
 */
import { renderEcdfOverlay, renderScatter } from "../charts.js";
import { clear, h } from "../dom.js";
import { cvmBadgeClass, fmt3, tabLabel } from "../format.js";
import type { SessionState } from "../state.js";
import type { SweepEntryDoc } from "../types.js";

export interface PanelsDeps {
  state: SessionState;
  onSelect?: (tau: number | null) => void;
}

export interface PanelsView {
  refresh(): void;
  show(tau: number | null): void;
}

function badge(pair: string, value: number): HTMLElement {
  return h(
    "span",
    {
      class: `badge ${cvmBadgeClass(value)}`,
      "data-pair": pair,
      "data-value": String(value),
      title: `CvM for ${pair}`,
    },
    [`${pair}: ${fmt3(value)}`],
  );
}

function entryPanel(entry: SweepEntryDoc): HTMLElement {
  const panel = h("div", { class: "tau-panel", "data-label": entry.label });
  panel.append(
    h("h3", {}, [tabLabel(entry.tau)]),
    h("p", {}, [
      `${entry.records.length} solutions, ${entry.errors.length} solver failures, ` +
        `${entry.records.filter((r) => r.feasible).length} feasible`,
    ]),
  );

  const badges = h("div", { class: "badge-row" });
  for (const [pair, value] of Object.entries(entry.cvm_by_pair)) {
    badges.append(badge(pair, value));
  }
  panel.append(h("h4", {}, ["Pair similarity (CvM, optimized vs optimized)"]), badges);

  for (const [pair, scatter] of Object.entries(entry.scatter)) {
    panel.append(
      h("h4", {}, [`${pair} scatter`]),
      renderScatter([
        { label: "initial", points: scatter.initial, color: "#9a9a9a" },
        { label: "optimized", points: scatter.optimized, color: "#1668aa" },
      ]),
    );
  }

  for (const [name, curves] of Object.entries(entry.ecdf)) {
    panel.append(
      h("h4", {}, [`${name} ECDF, initial vs optimized`]),
      renderEcdfOverlay([
        { label: "initial", curve: curves.initial, color: "#9a9a9a" },
        { label: "optimized", curve: curves.optimized, color: "#1668aa" },
      ]),
    );
  }

  const shifts = Object.entries(entry.marginal_shift);
  if (shifts.length > 0) {
    const list = h("ul", { class: "marginal-shift" });
    for (const [name, value] of shifts) {
      list.append(h("li", { "data-feature": name }, [`${name}: ${fmt3(value)}`]));
    }
    panel.append(h("h4", {}, ["Marginal shift vs history (CvM)"]), list);
  }

  if (entry.quantiles !== null) {
    const table = h("table", { class: "quantile-table" });
    table.append(
      h("tr", {}, [
        h("th", {}, ["quantile"]),
        h("th", {}, ["TE pred"]),
        h("th", {}, ["THR pred"]),
        h("th", {}, ["objective"]),
        h("th", {}, ["feasible"]),
      ]),
    );
    entry.quantiles.levels.forEach((level, i) => {
      const pick = entry.quantiles?.picks[i];
      if (!pick) return;
      table.append(
        h("tr", { "data-level": String(level) }, [
          h("td", {}, [`q${level}`]),
          h("td", {}, [fmt3(pick.te_pred)]),
          h("td", {}, [fmt3(pick.thr_pred)]),
          h("td", {}, [fmt3(pick.objective_value)]),
          h("td", {}, [pick.feasible ? "yes" : "no"]),
        ]),
      );
    });
    panel.append(h("h4", {}, ["Quantile picks"]), table);
  }

  return panel;
}

export function renderPanels(container: HTMLElement, deps: PanelsDeps): PanelsView {
  const tabs = h("div", { class: "tab-strip", role: "tablist" });
  const baselineBox = h("div", { class: "baseline-panel" });
  const panelBox = h("div", { class: "panel-box" });

  function show(tau: number | null): void {
    const entry = deps.state.selectTau(tau);
    for (const button of Array.from(tabs.querySelectorAll("button.tab"))) {
      const isActive = (button as HTMLButtonElement).dataset.tau === String(tau);
      button.classList.toggle("tab-active", isActive);
    }
    clear(panelBox);
    panelBox.append(entryPanel(entry));
    deps.onSelect?.(tau);
  }

  function refresh(): void {
    clear(container);
    container.append(h("h2", {}, ["Tolerance panels"]));
    const report = deps.state.report;
    if (report === null) {
      container.append(h("p", { class: "empty-note" }, ["Run a sweep to compare tolerance settings."]));
      return;
    }

    clear(baselineBox);
    baselineBox.append(h("h3", {}, ["History self-similarity baseline"]));
    const baselineBadges = h("div", { class: "badge-row" });
    for (const [pair, value] of Object.entries(report.baseline)) {
      baselineBadges.append(badge(pair, value));
    }
    baselineBox.append(baselineBadges);

    clear(tabs);
    for (const tau of report.taus) {
      const button = h("button", { class: "tab", "data-tau": String(tau) }, [tabLabel(tau)]);
      button.addEventListener("click", () => show(tau));
      tabs.append(button);
    }
    const unconstrainedTab = h("button", { class: "tab", "data-tau": "null" }, [tabLabel(null)]);
    unconstrainedTab.addEventListener("click", () => show(null));
    tabs.append(unconstrainedTab);

    container.append(baselineBox, tabs, panelBox);
    const initial = deps.state.selectedTau;
    show(initial === undefined ? (report.taus[0] ?? null) : initial);
  }

  refresh();
  return { refresh, show };
}
