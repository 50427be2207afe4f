/**
 * Setpoint export: pick a panel and a quantile, download the sheet the
 * service renders, and keep a session history of accepted choices.
 *
 * The export control stays disabled until a finished sweep report is
 * loaded and both selections are made. The sheet is saved exactly as
 * received; re-downloading a history row hands back the same bytes.
 */
import type { ApiClient } from "../api.js";
import { clear, h } from "../dom.js";
import { tabLabel } from "../format.js";
import type { ExportRecord, SessionState } from "../state.js";

export interface ExportDeps {
  api: ApiClient;
  state: SessionState;
  /** test hook; the default triggers a browser download */
  save?: (filename: string, text: string) => void;
}

export interface ExportView {
  refresh(): void;
  doExport(): Promise<void>;
}

function browserSave(filename: string, text: string): void {
  const blob = new Blob([text], { type: "text/csv" });
  const url = URL.createObjectURL(blob);
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = filename;
  anchor.click();
  URL.revokeObjectURL(url);
}

function sheetName(tau: number | null, quantile: number): string {
  const part = tau === null ? "unconstrained" : `tau${tau}`;
  return `setpoints_${part}_q${quantile}.csv`;
}

export function renderExport(container: HTMLElement, deps: ExportDeps): ExportView {
  const save = deps.save ?? browserSave;
  const tauSelect = h("select", { id: "export-tau" });
  const quantileSelect = h("select", { id: "export-quantile" });
  const exportButton = h("button", { id: "export-btn", class: "primary" }, ["Export setpoint sheet"]);
  const note = h("p", { class: "export-note" });
  const historyList = h("ol", { class: "export-history" });

  function renderHistory(): void {
    clear(historyList);
    for (const record of deps.state.history) {
      const item = h("li", {}, [
        `${tabLabel(record.tau)}, q${record.quantile}, ${record.at} `,
      ]);
      const again = h("button", { class: "re-download" }, ["download again"]);
      again.addEventListener("click", () =>
        save(sheetName(record.tau, record.quantile), record.csv),
      );
      item.append(again);
      historyList.append(item);
    }
  }

  function syncQuantiles(): void {
    clear(quantileSelect);
    quantileSelect.append(h("option", { value: "" }, ["choose quantile"]));
    const report = deps.state.report;
    if (report === null || deps.state.selectedTau === undefined) return;
    const entry = deps.state.entryFor(deps.state.selectedTau);
    if (entry.quantiles === null) return;
    for (const level of entry.quantiles.levels) {
      quantileSelect.append(h("option", { value: String(level) }, [`q${level}`]));
    }
  }

  function refresh(): void {
    const report = deps.state.report;
    clear(tauSelect);
    if (report === null) {
      tauSelect.append(h("option", { value: "" }, ["no sweep report yet"]));
      note.textContent = "Export unlocks once a sweep job is done.";
    } else {
      for (const tau of report.taus) {
        tauSelect.append(h("option", { value: String(tau) }, [tabLabel(tau)]));
      }
      tauSelect.append(h("option", { value: "null" }, [tabLabel(null)]));
      if (deps.state.selectedTau !== undefined) {
        tauSelect.value = String(deps.state.selectedTau);
      }
      note.textContent = "";
    }
    syncQuantiles();
    if (deps.state.selectedQuantile !== null) {
      quantileSelect.value = String(deps.state.selectedQuantile);
    }
    exportButton.disabled = !deps.state.canExport();
    renderHistory();
  }

  tauSelect.addEventListener("change", () => {
    if (deps.state.report === null || tauSelect.value === "") return;
    deps.state.selectTau(tauSelect.value === "null" ? null : Number(tauSelect.value));
    refresh();
  });

  quantileSelect.addEventListener("change", () => {
    if (quantileSelect.value === "") return;
    deps.state.selectQuantile(Number(quantileSelect.value));
    exportButton.disabled = !deps.state.canExport();
  });

  async function doExport(): Promise<void> {
    if (!deps.state.canExport() || deps.state.sweepJobId === null) return;
    const tau = deps.state.selectedTau as number | null;
    const quantile = deps.state.selectedQuantile as number;
    try {
      const csv = await deps.api.exportSetpoints({
        job: deps.state.sweepJobId,
        tau,
        quantile,
      });
      deps.state.recordExport(csv);
      save(sheetName(tau, quantile), csv);
      note.textContent = `exported ${sheetName(tau, quantile)}`;
      renderHistory();
    } catch (error) {
      note.textContent = error instanceof Error ? error.message : String(error);
    }
  }

  exportButton.addEventListener("click", () => void doExport());

  clear(container);
  container.append(
    h("h2", {}, ["Export setpoints"]),
    h("div", { class: "form-grid" }, [
      h("label", { for: "export-tau" }, ["Panel"]),
      tauSelect,
      h("label", { for: "export-quantile" }, ["Quantile"]),
      quantileSelect,
    ]),
    exportButton,
    note,
    h("h3", {}, ["Session history"]),
    historyList,
  );
  refresh();
  return { refresh, doExport };
}
