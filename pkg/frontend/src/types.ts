// Wire types for the /api/v1 endpoints. These mirror the JSON the server
// emits; every number here is displayed as-is or via String() — the client
// never derives new quantities from them.

export interface CovariateDoc {
  name: string;
  kind: "binary" | "continuous";
  center: number;
  dev_min: number;
  dev_max: number;
  dev_mean: number;
}

export interface ModelDoc {
  model_name: string;
  family: string;
  covariates: CovariateDoc[];
  n_dev: number;
  p: number;
  thresholds: number[];
}

export interface PredictRecord {
  yhat: number;
  eta: number;
  se_pred: number;
  rel_var: number;
  n_eff: number | null;
  n_eff_display: string;
  dev_percentile: number | null;
  per_hundred: number;
  annotations: string[];
}

export interface DistributionDoc {
  quantiles: Record<string, number>;
  histogram: { edges: number[]; counts: number[] };
  harmonic_mean: number;
  n_below: Record<string, number>;
  boundary_count: number;
}

export interface ApiError {
  status: number;
  code: string;
  message: string;
  field: string | null;
}

/** A prediction together with the inputs that produced it. */
export interface Scenario {
  covariates: Record<string, number>;
  record: PredictRecord;
}
