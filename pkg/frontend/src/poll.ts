/** Job polling at a fixed one second cadence. */
import type { ApiClient } from "./api.js";
import type { JobDoc } from "./types.js";

export const POLL_INTERVAL_MS = 1000;

export class JobFailedError extends Error {
  constructor(readonly job: JobDoc) {
    super(job.error ?? `job ${job.id} failed`);
    this.name = "JobFailedError";
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

/**
 * Poll a job until it settles. Resolves with the done document, rejects
 * with JobFailedError carrying the service's error text on failure. The
 * onUpdate hook fires after every poll, including the final one.
 */
export async function pollJob(
  api: ApiClient,
  jobId: string,
  options: { intervalMs?: number; onUpdate?: (job: JobDoc) => void } = {},
): Promise<JobDoc> {
  const interval = options.intervalMs ?? POLL_INTERVAL_MS;
  for (;;) {
    const job = await api.job(jobId);
    options.onUpdate?.(job);
    if (job.state === "done") return job;
    if (job.state === "failed") throw new JobFailedError(job);
    await sleep(interval);
  }
}
