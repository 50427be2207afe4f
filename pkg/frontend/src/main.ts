/**
 * Application shell: connect to the service, upload a dataset, then walk
 * the operator loop top to bottom (correlations, training, sweep,
 * panels, export) on a single page.
 */
import { ApiClient } from "./api.js";
import { clear, h } from "./dom.js";
import { parseCsvColumns } from "./csv.js";
import { SessionState } from "./state.js";
import { renderCorrelations } from "./views/correlations.js";
import { renderExport } from "./views/exportView.js";
import { renderPanels } from "./views/panels.js";
import { renderSweepForm } from "./views/sweep.js";
import { renderTrain } from "./views/train.js";

export interface BootOptions {
  defaultBaseUrl?: string;
}

export function boot(root: HTMLElement, options: BootOptions = {}): void {
  clear(root);
  const state = new SessionState();
  let localColumns: Record<string, number[]> | null = null;

  const connect = h("section", { class: "card" });
  const urlInput = h("input", {
    id: "base-url",
    type: "text",
    value: options.defaultBaseUrl ?? "http://127.0.0.1:8000",
    size: "30",
  });
  const tokenInput = h("input", { id: "token", type: "password", size: "30" });
  const connectButton = h("button", { id: "connect", class: "primary" }, ["Connect"]);
  const connectStatus = h("p", { class: "connect-status" });
  connect.append(
    h("h2", {}, ["Service"]),
    h("div", { class: "form-grid" }, [
      h("label", { for: "base-url" }, ["Service URL"]),
      urlInput,
      h("label", { for: "token" }, ["API token"]),
      tokenInput,
    ]),
    connectButton,
    connectStatus,
  );
  root.append(h("h1", {}, ["Setpoint optimization console"]), connect);

  const sections = {
    dataset: h("section", { class: "card" }),
    correlations: h("section", { class: "card" }),
    train: h("section", { class: "card" }),
    sweep: h("section", { class: "card" }),
    panels: h("section", { class: "card" }),
    export: h("section", { class: "card" }),
  };

  connectButton.addEventListener("click", () => {
    void (async () => {
      const api = new ApiClient(urlInput.value, tokenInput.value);
      try {
        await api.health();
      } catch (error) {
        connectStatus.textContent = `service unreachable: ${
          error instanceof Error ? error.message : String(error)
        }`;
        return;
      }
      connectStatus.textContent = "connected";
      buildWorkspace(api);
    })();
  });

  function buildWorkspace(api: ApiClient): void {
    for (const section of Object.values(sections)) {
      clear(section);
      root.append(section);
    }

    const correlations = renderCorrelations(sections.correlations, {
      api,
      state,
      get localColumns() {
        return localColumns;
      },
    });
    void correlations.load();

    const panels = renderPanels(sections.panels, { state });
    const exporter = renderExport(sections.export, { api, state });
    const sweepForm = renderSweepForm(sections.sweep, {
      api,
      state,
      onReport: () => {
        panels.refresh();
        exporter.refresh();
      },
    });
    const train = renderTrain(sections.train, {
      api,
      state,
      onTrained: () => sweepForm.refresh(),
    });

    const fileInput = h("input", { id: "dataset-file", type: "file", accept: ".csv" });
    const schemaSelect = h("select", { id: "dataset-schema" }, [
      h("option", { value: "cluster" }, ["cluster (6 operating variables)"]),
      h("option", { value: "plant" }, ["plant (9 operating variables)"]),
    ]);
    const uploadButton = h("button", { id: "upload", class: "primary" }, ["Upload"]);
    const uploadStatus = h("p", { class: "upload-status" });
    sections.dataset.append(
      h("h2", {}, ["Dataset"]),
      h("div", { class: "form-grid" }, [
        h("label", { for: "dataset-file" }, ["CSV file"]),
        fileInput,
        h("label", { for: "dataset-schema" }, ["Schema"]),
        schemaSelect,
      ]),
      uploadButton,
      uploadStatus,
    );

    uploadButton.addEventListener("click", () => {
      void (async () => {
        const file = fileInput.files?.[0];
        if (!file) {
          uploadStatus.textContent = "choose a CSV file first";
          return;
        }
        const text = await file.text();
        try {
          const meta = await api.uploadDataset(text, schemaSelect.value);
          state.datasetId = meta.dataset_id;
          localColumns = parseCsvColumns(text);
          uploadStatus.textContent = `dataset ${meta.dataset_id.slice(0, 12)}… (${meta.n_rows} rows)`;
          await correlations.load();
          train.refresh();
        } catch (error) {
          uploadStatus.textContent = error instanceof Error ? error.message : String(error);
        }
      })();
    });
  }
}
