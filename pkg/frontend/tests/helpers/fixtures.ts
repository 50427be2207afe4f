/**
 * Frozen service payloads captured by scripts/make_fixtures.py.
 *
 * Fixtures are deep-frozen before tests touch them: any view that tried
 * to mutate a report in place would throw, which keeps the "UI never
 * mutates reports" invariant enforced by construction in every test.
 */
import { readFileSync } from "node:fs";
import { resolve } from "node:path";

import type {
  DatasetMeta,
  JobDoc,
  ShapReportDoc,
  StatsPayload,
  SweepReportDoc,
  TrainReportDoc,
} from "../../src/types.js";

function fixturePath(name: string): string {
  // vitest runs with the package directory as the working directory
  return resolve(process.cwd(), "tests", "fixtures", name);
}

export function deepFreeze<T>(value: T): T {
  if (value !== null && (typeof value === "object" || typeof value === "function")) {
    for (const key of Object.getOwnPropertyNames(value)) {
      deepFreeze((value as Record<string, unknown>)[key]);
    }
    Object.freeze(value);
  }
  return value;
}

export function loadText(name: string): string {
  return readFileSync(fixturePath(name), "utf8");
}

export function loadJson<T>(name: string): T {
  return deepFreeze(JSON.parse(loadText(name)) as T);
}

export const fixtures = {
  datasetMeta: () => loadJson<DatasetMeta>("dataset_meta.json"),
  stats: () => loadJson<StatsPayload>("stats.json"),
  trainJobQueued: () => loadJson<JobDoc>("train_job_queued.json"),
  trainJobDone: () => loadJson<JobDoc>("train_job_done.json"),
  trainReport: () => loadJson<TrainReportDoc>("train_report.json"),
  shapTe: () => loadJson<ShapReportDoc>("shap_te.json"),
  sweepJobQueued: () => loadJson<JobDoc>("sweep_job_queued.json"),
  sweepJobDone: () => loadJson<JobDoc>("sweep_job_done.json"),
  sweepReport: () => loadJson<SweepReportDoc>("sweep_report.json"),
  exportTau010Q50: () => loadText("export_tau010_q50.csv"),
  exportUnconstrainedQ50: () => loadText("export_unconstrained_q50.csv"),
  datasetCsv: () => loadText("dataset.csv"),
};
