/**
 * Surrogate training: submit the train job for the active dataset, poll
 * it, and show per-target metrics plus SHAP contribution rankings.
 */
import type { ApiClient } from "../api.js";
import { clear, h } from "../dom.js";
import { fmtPercent } from "../format.js";
import { JobFailedError, pollJob } from "../poll.js";
import type { SessionState } from "../state.js";

export interface TrainDeps {
  api: ApiClient;
  state: SessionState;
  onTrained?: () => void;
  intervalMs?: number;
}

export interface TrainView {
  refresh(): void;
  launch(): Promise<void>;
}

export function renderTrain(container: HTMLElement, deps: TrainDeps): TrainView {
  const launchButton = h("button", { id: "launch-train", class: "primary" }, ["Train surrogates"]);
  const status = h("p", { class: "train-status" });
  const results = h("div", { class: "train-results" });

  function refresh(): void {
    launchButton.disabled = deps.state.datasetId === null;
    status.textContent = deps.state.datasetId === null ? "Upload a dataset first." : "";
  }

  async function launch(): Promise<void> {
    const datasetId = deps.state.datasetId;
    if (datasetId === null) return;
    launchButton.disabled = true;
    status.textContent = "submitting training job";
    try {
      const submitted = await deps.api.submitTrain({ dataset_id: datasetId });
      const done = await pollJob(deps.api, submitted.id, {
        intervalMs: deps.intervalMs,
        onUpdate: (job) => {
          status.textContent = `training ${job.state} (${Math.round(job.progress * 100)}%)`;
        },
      });
      deps.state.trainJobId = done.id;
      const report = await deps.api.trainReport(done.id);
      clear(results);
      const table = h("table", { class: "metrics-table" });
      table.append(
        h("tr", {}, [
          h("th", {}, ["target"]),
          h("th", {}, ["train R2"]),
          h("th", {}, ["test R2"]),
          h("th", {}, ["test RMSE"]),
        ]),
      );
      for (const [target, doc] of Object.entries(report.targets)) {
        table.append(
          h("tr", { "data-target": target }, [
            h("td", {}, [target]),
            h("td", {}, [doc.metrics.train.r2.toFixed(4)]),
            h("td", {}, [doc.metrics.test.r2.toFixed(4)]),
            h("td", {}, [doc.metrics.test.rmse.toFixed(4)]),
          ]),
        );
      }
      results.append(table);
      for (const target of ["TE", "THR"] as const) {
        const shap = await deps.api.shapReport(target, done.id);
        const list = h("ol", { class: "shap-list", "data-target": target });
        for (const row of shap.contributions) {
          list.append(h("li", {}, [`${row.feature}: ${fmtPercent(row.percent)}`]));
        }
        results.append(h("h4", {}, [`${target} feature contributions`]), list);
      }
      status.textContent = "surrogates trained";
      deps.onTrained?.();
    } catch (error) {
      status.textContent =
        error instanceof JobFailedError
          ? `training failed: ${error.message}`
          : error instanceof Error
            ? error.message
            : String(error);
    } finally {
      launchButton.disabled = deps.state.datasetId === null;
    }
  }

  launchButton.addEventListener("click", () => void launch());

  clear(container);
  container.append(h("h2", {}, ["Surrogate models"]), launchButton, status, results);
  refresh();
  return { refresh, launch };
}
