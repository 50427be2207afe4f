/**
 * Operator session state.
 *
 * Tracks which artifacts the session is working with and the operator's
 * current tau/quantile selection. Selections are validated against the
 * loaded report: a tau or quantile that does not correspond to an entry
 * the service produced is rejected, so the export flow can only ever
 * reference report entries that exist. Reports themselves are held as
 * received and never edited.
 */
import type { SweepEntryDoc, SweepReportDoc } from "./types.js";

export interface ExportRecord {
  job: string;
  tau: number | null;
  quantile: number;
  csv: string;
  at: string;
}

export class SessionState {
  datasetId: string | null = null;
  trainJobId: string | null = null;
  sweepJobId: string | null = null;
  report: SweepReportDoc | null = null;
  /** undefined means no panel chosen yet; null means the unconstrained one */
  selectedTau: number | null | undefined = undefined;
  selectedQuantile: number | null = null;
  pendingExport = false;
  readonly history: ExportRecord[] = [];

  /** Attach a finished sweep; selection resets to the first tau panel. */
  loadReport(jobId: string, report: SweepReportDoc): void {
    this.sweepJobId = jobId;
    this.report = report;
    this.selectedTau = report.taus.length > 0 ? report.taus[0] : null;
    this.selectedQuantile = null;
  }

  clearReport(): void {
    this.sweepJobId = null;
    this.report = null;
    this.selectedTau = undefined;
    this.selectedQuantile = null;
  }

  /** The report entry for a tau (null for unconstrained). Throws if absent. */
  entryFor(tau: number | null): SweepEntryDoc {
    if (this.report === null) {
      throw new RangeError("no sweep report is loaded");
    }
    if (tau === null) return this.report.unconstrained;
    const entry = this.report.entries.find((candidate) => candidate.tau === tau);
    if (entry === undefined) {
      throw new RangeError(`no sweep entry for tau ${tau}`);
    }
    return entry;
  }

  selectTau(tau: number | null): SweepEntryDoc {
    const entry = this.entryFor(tau);
    this.selectedTau = tau;
    this.selectedQuantile = null;
    return entry;
  }

  selectQuantile(level: number): void {
    if (this.selectedTau === undefined) {
      throw new RangeError("select a panel before choosing a quantile");
    }
    const entry = this.entryFor(this.selectedTau);
    if (entry.quantiles === null || !entry.quantiles.levels.includes(level)) {
      throw new RangeError(`quantile ${level} is not available for this entry`);
    }
    this.selectedQuantile = level;
  }

  /** True once a finished report is loaded and a full selection exists. */
  canExport(): boolean {
    return (
      this.report !== null &&
      this.sweepJobId !== null &&
      this.selectedTau !== undefined &&
      this.selectedQuantile !== null
    );
  }

  recordExport(csv: string, now: () => string = () => new Date().toISOString()): ExportRecord {
    if (!this.canExport() || this.sweepJobId === null) {
      throw new RangeError("cannot record an export without a complete selection");
    }
    const record: ExportRecord = {
      job: this.sweepJobId,
      tau: this.selectedTau as number | null,
      quantile: this.selectedQuantile as number,
      csv,
      at: now(),
    };
    this.history.push(record);
    return record;
  }
}
