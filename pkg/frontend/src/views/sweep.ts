/**
 * Sweep launcher: tolerance grid form, client-side validation, job
 * submission, and one-second progress polling until the report is in.
 */
import type { ApiClient } from "../api.js";
import { clear, h } from "../dom.js";
import { JobFailedError, pollJob } from "../poll.js";
import type { SessionState } from "../state.js";
import type { SweepReportDoc, SweepRequest } from "../types.js";
import { defaultTauText, parseBounds, parseTauList } from "../validate.js";

export interface SweepDeps {
  api: ApiClient;
  state: SessionState;
  onReport?: (report: SweepReportDoc) => void;
  /** test hook; production uses the 1 s default */
  intervalMs?: number;
}

export interface SweepView {
  refresh(): void;
  launch(): Promise<void>;
}

export function renderSweepForm(container: HTMLElement, deps: SweepDeps): SweepView {
  clear(container);
  container.append(h("h2", {}, ["Tolerance sweep"]));

  const tauInput = h("input", {
    id: "tau-list",
    type: "text",
    value: defaultTauText(),
    size: "40",
  });
  const guessInput = h("input", { id: "n-guesses", type: "text", placeholder: "service default" });
  const seedInput = h("input", { id: "guess-seed", type: "text", placeholder: "service default" });
  const boundsInput = h("textarea", {
    id: "bounds",
    rows: "2",
    cols: "40",
    placeholder: "optional JSON, e.g. [[0, 1], [0, 1], ...]",
  });
  const launchButton = h("button", { id: "launch-sweep", class: "primary" }, ["Launch sweep"]);
  const errorNote = h("p", { class: "form-error", role: "alert" });
  const status = h("p", { class: "sweep-status" });
  const progress = h("progress", { max: "1", value: "0" });
  progress.style.display = "none";

  container.append(
    h("div", { class: "form-grid" }, [
      h("label", { for: "tau-list" }, ["Tolerances (comma separated)"]),
      tauInput,
      h("label", { for: "n-guesses" }, ["Initial guesses"]),
      guessInput,
      h("label", { for: "guess-seed" }, ["Guess seed"]),
      seedInput,
      h("label", { for: "bounds" }, ["Bounds"]),
      boundsInput,
    ]),
    launchButton,
    errorNote,
    status,
    progress,
  );

  function refresh(): void {
    launchButton.disabled = deps.state.trainJobId === null;
    status.textContent = deps.state.trainJobId === null ? "Train the surrogates first." : "";
  }

  async function launch(): Promise<void> {
    errorNote.textContent = "";
    const trainJobId = deps.state.trainJobId;
    if (trainJobId === null) {
      errorNote.textContent = "train the surrogates before sweeping";
      return;
    }
    const tauParse = parseTauList(tauInput.value);
    if (!tauParse.ok) {
      errorNote.textContent = tauParse.message;
      return;
    }
    const boundsParse = parseBounds(boundsInput.value);
    if (!boundsParse.ok) {
      errorNote.textContent = boundsParse.message;
      return;
    }
    const body: SweepRequest = { train_job: trainJobId, tau_list: tauParse.taus };
    if (boundsParse.bounds !== undefined) body.bounds = boundsParse.bounds;
    if (guessInput.value.trim()) {
      const n = Number(guessInput.value);
      if (!Number.isInteger(n) || n < 1) {
        errorNote.textContent = "initial guesses must be a positive integer";
        return;
      }
      body.n_guesses = n;
    }
    if (seedInput.value.trim()) {
      const seed = Number(seedInput.value);
      if (!Number.isInteger(seed)) {
        errorNote.textContent = "guess seed must be an integer";
        return;
      }
      body.guess_seed = seed;
    }

    launchButton.disabled = true;
    progress.style.display = "";
    status.textContent = "submitting sweep";
    try {
      const submitted = await deps.api.submitSweep(body);
      deps.state.sweepJobId = submitted.id;
      const done = await pollJob(deps.api, submitted.id, {
        intervalMs: deps.intervalMs,
        onUpdate: (job) => {
          status.textContent = `sweep ${job.state} (${Math.round(job.progress * 100)}%)`;
          progress.value = job.progress;
        },
      });
      const report = await deps.api.sweepReport(done.id);
      deps.state.loadReport(done.id, report);
      status.textContent = `sweep done: ${report.entries.length} tolerance panels plus unconstrained`;
      deps.onReport?.(report);
    } catch (error) {
      if (error instanceof JobFailedError) {
        status.textContent = `sweep failed: ${error.message}`;
      } else {
        status.textContent = error instanceof Error ? error.message : String(error);
      }
    } finally {
      progress.style.display = "none";
      launchButton.disabled = deps.state.trainJobId === null;
    }
  }

  launchButton.addEventListener("click", () => void launch());
  refresh();
  return { refresh, launch };
}
