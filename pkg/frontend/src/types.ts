/**
 * Typed mirrors of the service JSON payloads.
 *
 * Every shape here matches a `to_dict` on the Python side field for field.
 * The UI never reshapes or recomputes these documents; it renders them.
 */

export interface VariableSummary {
  name: string;
  unit: string;
  role: string;
  min: number;
  max: number;
  mean: number;
}

export interface DatasetMeta {
  schema_version: number;
  dataset_id: string;
  schema: string;
  n_rows: number;
  variables: VariableSummary[];
}

export interface EcdfCurve {
  values: number[];
  probabilities: number[];
}

export interface KdeCurve {
  grid: number[];
  density: number[];
  bandwidth: number;
}

export interface CorrelationReport {
  names: string[];
  /** null marks an undefined coefficient (a constant column) */
  matrix: (number | null)[][];
  threshold: number;
  correlated_pairs: [string, string, number][];
  constant_variables: string[];
}

export interface StatsPayload {
  schema_version: number;
  dataset_id: string;
  n_rows: number;
  correlation: CorrelationReport;
  distributions: Record<string, { ecdf: EcdfCurve; kde: KdeCurve | null }>;
}

export type JobState = "queued" | "running" | "done" | "failed";

export interface JobDoc {
  schema_version: number;
  id: string;
  kind: "train" | "sweep" | "carbon";
  params: Record<string, unknown>;
  state: JobState;
  progress: number;
  result: string | null;
  error: string | null;
}

export interface MetricsDoc {
  r2: number;
  rmse: number;
}

export interface TrainTargetDoc {
  hyperparams: Record<string, number>;
  norm: [number, number];
  metrics: { train: MetricsDoc; test: MetricsDoc };
}

export interface TrainReportDoc {
  schema_version: number;
  schema: string;
  dataset: string;
  dataset_id: string;
  seed: number;
  alpha: number;
  fractions: { train: number; calibration: number };
  feature_names: string[];
  scaler: { names: string[]; minimums: number[]; maximums: number[] };
  targets: Record<string, TrainTargetDoc>;
}

export interface ShapContribution {
  feature: string;
  percent: number;
}

export interface ShapReportDoc {
  schema_version: number;
  target: string;
  train_job: string;
  evaluation_split: string;
  contributions: ShapContribution[];
}

export interface SolutionRecordDoc {
  initial_guess_id: number;
  x_scaled: number[];
  x_engineering: number[] | null;
  te_pred: number;
  thr_pred: number;
  te_interval: [number, number] | null;
  thr_interval: [number, number] | null;
  objective_value: number;
  feasible: boolean;
  max_chain_violation: number;
  evaluations: number;
  status: string;
}

export interface QuantilePicksDoc {
  levels: number[];
  picks: SolutionRecordDoc[];
}

export interface PairScatter {
  initial: [number, number][];
  optimized: [number, number][];
}

export interface SweepEntryDoc {
  label: string;
  tau: number | null;
  records: SolutionRecordDoc[];
  cvm_by_pair: Record<string, number>;
  marginal_shift: Record<string, number>;
  quantiles: QuantilePicksDoc | null;
  errors: [number, string][];
  ecdf: Record<string, { initial: EcdfCurve; optimized: EcdfCurve }>;
  scatter: Record<string, PairScatter>;
}

export interface SweepReportDoc {
  schema_version: number;
  taus: number[];
  chain_features: string[];
  baseline: Record<string, number>;
  unconstrained: SweepEntryDoc;
  entries: SweepEntryDoc[];
  train_job: string;
  dataset_id: string;
  feature_names: string[];
  feature_units: string[];
}

export interface TrainRequest {
  dataset_id: string;
  seed?: number;
  alpha?: number;
  tuning_budget?: number;
  train_fraction?: number;
  calibration_fraction?: number;
  hyperparams?: Record<string, number>;
}

export interface SweepRequest {
  train_job: string;
  tau_list: number[];
  bounds?: [number, number][];
  quantiles?: number[];
  chain?: string[];
  n_guesses?: number;
  guess_seed?: number;
  weights?: [number, number];
  solver?: { rho_beg?: number; rho_end?: number; maxfun?: number };
  jobs?: number;
}

export interface ExportSelection {
  job: string;
  /** null selects the unconstrained entry */
  tau: number | null;
  quantile: number;
}
