import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { JobFailedError, POLL_INTERVAL_MS, pollJob } from "../src/poll.js";
import { scriptedFetch } from "./helpers/fakeFetch.js";
import type { JobDoc } from "../src/types.js";

function jobDoc(state: JobDoc["state"], progress: number, error: string | null = null): JobDoc {
  return {
    schema_version: 1,
    id: "j1",
    kind: "sweep",
    params: {},
    state,
    progress,
    result: state === "done" ? "/reports/sweep/j1" : null,
    error,
  };
}

describe("pollJob", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });

  afterEach(() => {
    vi.useRealTimers();
  });

  it("polls once per second until the job is done", async () => {
    const sequence = [jobDoc("queued", 0), jobDoc("running", 0.1), jobDoc("done", 1)];
    let polls = 0;
    const { fetchFn, calls } = scriptedFetch(() => ({ json: sequence[Math.min(polls++, 2)] }));
    const api = new ApiClient("http://service.test", "tok", fetchFn);

    const states: string[] = [];
    const settled = pollJob(api, "j1", { onUpdate: (job) => states.push(job.state) });

    await vi.advanceTimersByTimeAsync(0);
    expect(calls.length).toBe(1);
    await vi.advanceTimersByTimeAsync(POLL_INTERVAL_MS - 1);
    expect(calls.length).toBe(1);
    await vi.advanceTimersByTimeAsync(1);
    expect(calls.length).toBe(2);
    await vi.advanceTimersByTimeAsync(POLL_INTERVAL_MS);
    expect(calls.length).toBe(3);

    const done = await settled;
    expect(done.state).toBe("done");
    expect(done.result).toBe("/reports/sweep/j1");
    expect(states).toEqual(["queued", "running", "done"]);
  });

  it("rejects with the service error text when the job fails", async () => {
    const sequence = [jobDoc("running", 0.4), jobDoc("failed", 0.4, "solver exploded")];
    let polls = 0;
    const { fetchFn } = scriptedFetch(() => ({ json: sequence[Math.min(polls++, 1)] }));
    const api = new ApiClient("http://service.test", "tok", fetchFn);

    const settled = pollJob(api, "j1");
    const outcome = settled.then(
      () => "resolved",
      (error) => error,
    );
    await vi.advanceTimersByTimeAsync(POLL_INTERVAL_MS * 2);
    const error = await outcome;
    expect(error).toBeInstanceOf(JobFailedError);
    expect((error as JobFailedError).message).toBe("solver exploded");
    expect((error as JobFailedError).job.state).toBe("failed");
  });
});
