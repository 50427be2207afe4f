/**
 * Thin typed client for the optimization service.
 *
 * Every call attaches the operator token header and surfaces service
 * errors as ApiError with the HTTP status and the `detail` text the
 * service returned. Response bodies are handed back as parsed JSON or,
 * for the setpoint sheet, as the exact text the service produced; the
 * client never transforms a payload.
 */
import type {
  DatasetMeta,
  ExportSelection,
  JobDoc,
  ShapReportDoc,
  StatsPayload,
  SweepReportDoc,
  SweepRequest,
  TrainReportDoc,
  TrainRequest,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

/** The slice of the fetch Response the client relies on. */
export interface ApiResponse {
  ok: boolean;
  status: number;
  statusText: string;
  json(): Promise<unknown>;
  text(): Promise<string>;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<ApiResponse>;

export class ApiClient {
  private readonly base: string;

  constructor(
    baseUrl: string,
    private readonly token: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {
    this.base = baseUrl.replace(/\/+$/, "");
  }

  private async request(path: string, init: RequestInit = {}): Promise<ApiResponse> {
    const headers = new Headers(init.headers);
    headers.set("X-API-Token", this.token);
    const response = await this.fetchFn(this.base + path, { ...init, headers });
    if (!response.ok) {
      let detail = `${response.status} ${response.statusText}`;
      try {
        const body = (await response.json()) as { detail?: unknown };
        if (typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status line
      }
      throw new ApiError(response.status, detail);
    }
    return response;
  }

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.request(path);
    return (await response.json()) as T;
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const response = await this.request(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return (await response.json()) as T;
  }

  async health(): Promise<string> {
    const response = await this.request("/healthz");
    return response.text();
  }

  async uploadDataset(csv: string | Blob, schema: string): Promise<DatasetMeta> {
    const response = await this.request(`/datasets?schema=${encodeURIComponent(schema)}`, {
      method: "POST",
      headers: { "Content-Type": "text/csv" },
      body: csv,
    });
    return (await response.json()) as DatasetMeta;
  }

  datasetStats(datasetId: string): Promise<StatsPayload> {
    return this.getJson(`/datasets/${datasetId}/stats`);
  }

  submitTrain(body: TrainRequest): Promise<JobDoc> {
    return this.postJson("/jobs/train", body);
  }

  submitSweep(body: SweepRequest): Promise<JobDoc> {
    return this.postJson("/jobs/sweep", body);
  }

  job(jobId: string): Promise<JobDoc> {
    return this.getJson(`/jobs/${jobId}`);
  }

  trainReport(jobId: string): Promise<TrainReportDoc> {
    return this.getJson(`/reports/train/${jobId}`);
  }

  sweepReport(jobId: string): Promise<SweepReportDoc> {
    return this.getJson(`/reports/sweep/${jobId}`);
  }

  shapReport(target: "TE" | "THR", trainJobId: string): Promise<ShapReportDoc> {
    return this.getJson(`/reports/shap/${target}?job=${encodeURIComponent(trainJobId)}`);
  }

  /** Returns the setpoint sheet exactly as the service sent it. */
  async exportSetpoints(selection: ExportSelection): Promise<string> {
    const body: Record<string, unknown> = {
      job: selection.job,
      quantile: selection.quantile,
    };
    if (selection.tau !== null) body.tau = selection.tau;
    const response = await this.request("/export/setpoints", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return response.text();
  }
}
