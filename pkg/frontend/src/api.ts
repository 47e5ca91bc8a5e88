/** Payload types for /api/v1 and a thin fetch client with cancellation.
 *
 * The dashboard never computes a metric: every number it shows is read
 * verbatim from one of these payloads (enforced by the contract tests).
 */

export interface QuerySpecWire {
  source_feeds: string[];
  time_from: string;
  time_to: string;
  model_type: string;
  model_versions: string[];
  vendor_ids: string[];
  threshold: number | null;
  file_types_include: string[];
  scored_by_model_only: boolean;
  min_coverage_pct: number;
}

export interface EngineInfo {
  engine_id: string;
  kind: string;
  model_type: string | null;
  version: string;
  default_threshold: number | null;
  vote_weight: number | null;
}

export interface MetaPayload {
  schema: string;
  engines: EngineInfo[];
  sources: string[];
  date_range: { from: string; to: string } | null;
  defaults: QuerySpecWire | null;
  row_count: number;
}

export interface EngineMetricsEntry {
  engine_id: string;
  kind: string;
  tp: number;
  fp: number;
  tn: number;
  fn: number;
  unscanned: number;
  n_labeled: number;
  tpr: number | null;
  fpr: number | null;
  sample_ratio: { malicious: number | null; benign: number | null; unlabeled: number | null };
  low_coverage_warning: boolean;
}

export interface TimeSeriesPointWire {
  day: string;
  tpr: number | null;
  fpr: number | null;
  n_labeled: number;
}

export interface RocEntry {
  engine_id: string;
  defined: boolean;
  auc: number | null;
  points: { threshold: number | null; fpr: number; tpr: number }[];
}

export interface MetricsPayload {
  schema: string;
  empty: boolean;
  query: QuerySpecWire;
  row_count: number;
  engines: EngineMetricsEntry[];
  time_series: { engine_id: string; points: TimeSeriesPointWire[] }[];
  roc: RocEntry[];
  vendor_points: { engine_id: string; fpr: number | null; tpr: number | null }[];
}

export interface IssueDayWire {
  day: string;
  pct_missing_source: number | null;
  pct_unlabeled: number | null;
  pct_missing_filetype: number | null;
}

export interface VolumeSeriesWire {
  engine_id: string;
  label: string;
  points: { day: string; count: number }[];
}

export interface AnomalyWire {
  series: string;
  day: string;
  direction: string;
  robust_z: number | null;
}

export interface QualityPayload {
  schema: string;
  empty: boolean;
  query: QuerySpecWire;
  row_count: number;
  issue_series: IssueDayWire[];
  volume_series: VolumeSeriesWire[];
  anomalies: AnomalyWire[];
}

export interface BreakdownRowWire {
  group_key: string;
  vendors: string[];
  detected: number;
  missed: number;
  total_samples: number;
  total_malicious: number;
  endpoints: number;
  detection_ratio: number | null;
  color_bucket: number | null;
}

export interface BreakdownPayload {
  schema: string;
  empty: boolean;
  query: QuerySpecWire;
  model: string;
  group_by: string;
  rows: BreakdownRowWire[];
}

export interface DetailsRowWire {
  artifact_id: string;
  ingest_day: string;
  kind: string;
  file_type: string | null;
  source_feed: string;
  label: string;
  label_reason: string;
  vote_score: number | null;
  family: string;
  family_vendors: string[];
  prevalence: number;
  age_days: number;
  endpoint_count: number;
  observations: { engine: string; scanned: boolean; score: number | null; verdict: string | null }[];
}

export interface DetailsPayload {
  schema: string;
  empty: boolean;
  query: QuerySpecWire;
  total: number;
  page: number;
  page_size: number;
  rows: DetailsRowWire[];
}

export interface ElementRefWire {
  engine_id?: string;
  metric?: string;
  day?: string;
  group_by?: string;
  group_key?: string;
}

export class ApiError extends Error {
  violations: string[];

  constructor(message: string, violations: string[] = []) {
    super(message);
    this.violations = violations;
  }
}

async function post<T>(path: string, body: unknown, signal?: AbortSignal): Promise<T> {
  const response = await fetch(path, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
    signal,
  });
  if (!response.ok) {
    let violations: string[] = [];
    try {
      violations = (await response.json()).violations ?? [];
    } catch {
      // non-JSON error body: report the status alone
    }
    throw new ApiError(`request failed: ${response.status}`, violations);
  }
  return (await response.json()) as T;
}

export const api = {
  meta: async (signal?: AbortSignal): Promise<MetaPayload> => {
    const response = await fetch("/api/v1/meta", { signal });
    if (!response.ok) throw new ApiError(`request failed: ${response.status}`);
    return (await response.json()) as MetaPayload;
  },
  metrics: (query: QuerySpecWire, signal?: AbortSignal) =>
    post<MetricsPayload>("/api/v1/query/metrics", query, signal),
  quality: (query: QuerySpecWire, signal?: AbortSignal) =>
    post<QualityPayload>("/api/v1/query/quality", query, signal),
  breakdown: (
    query: QuerySpecWire,
    options: { group_by: string; substring: string | null; sort_key: string; descending: boolean },
    signal?: AbortSignal,
  ) => post<BreakdownPayload>("/api/v1/query/breakdown", { ...query, ...options }, signal),
  details: (
    query: QuerySpecWire,
    element: ElementRefWire,
    page: number,
    pageSize: number,
    signal?: AbortSignal,
  ) =>
    post<DetailsPayload>("/api/v1/query/details", {
      ...query,
      element,
      page,
      page_size: pageSize,
    }, signal),
  exportCsvBody: (query: QuerySpecWire, element: ElementRefWire) =>
    JSON.stringify({ ...query, element }),
};
