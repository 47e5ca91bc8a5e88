/** Filter-panel state, its URL encoding, and the QuerySpec it serializes to.
 *
 * The whole view is shareable: state round-trips through the URL query
 * string, so loading a copied link reproduces the identical query and tab.
 */
import type { QuerySpecWire } from "./api.js";

export type Tab = "metrics" | "quality" | "breakdown";

export interface FilterPanelState {
  sourceFeeds: string[];
  timeFrom: string;
  timeTo: string;
  modelType: string;
  modelVersions: string[];
  vendorIds: string[];
  threshold: number | null;
  fileTypesInclude: string[];
  scoredByModelOnly: boolean;
  minCoveragePct: number;
  // UI-only state
  advancedOpen: boolean;
  tab: Tab;
  groupBy: "family" | "filetype";
  substring: string;
  sortKey: string;
  descending: boolean;
}

export const DEFAULT_STATE: FilterPanelState = {
  sourceFeeds: [],
  timeFrom: "",
  timeTo: "",
  modelType: "PE",
  modelVersions: [],
  vendorIds: [],
  threshold: null,
  fileTypesInclude: [],
  scoredByModelOnly: false,
  minCoveragePct: 0,
  advancedOpen: false,
  tab: "metrics",
  groupBy: "family",
  substring: "",
  sortKey: "group_key",
  descending: false,
};

export function stateFromDefaults(defaults: QuerySpecWire): FilterPanelState {
  return {
    ...DEFAULT_STATE,
    sourceFeeds: [...defaults.source_feeds],
    timeFrom: defaults.time_from,
    timeTo: defaults.time_to,
    modelType: defaults.model_type,
    modelVersions: [...defaults.model_versions],
    vendorIds: [...defaults.vendor_ids],
    threshold: defaults.threshold,
    fileTypesInclude: [...defaults.file_types_include],
    scoredByModelOnly: defaults.scored_by_model_only,
    minCoveragePct: defaults.min_coverage_pct,
  };
}

export function toQuerySpec(state: FilterPanelState): QuerySpecWire {
  return {
    source_feeds: [...state.sourceFeeds].sort(),
    time_from: state.timeFrom,
    time_to: state.timeTo,
    model_type: state.modelType,
    model_versions: [...state.modelVersions].sort(),
    vendor_ids: [...state.vendorIds].sort(),
    threshold: state.threshold,
    file_types_include: [...state.fileTypesInclude].sort(),
    scored_by_model_only: state.scoredByModelOnly,
    min_coverage_pct: state.minCoveragePct,
  };
}

const LIST_SEP = ",";

export function encodeState(state: FilterPanelState): string {
  const params = new URLSearchParams();
  params.set("from", state.timeFrom);
  params.set("to", state.timeTo);
  params.set("type", state.modelType);
  if (state.modelVersions.length) params.set("models", state.modelVersions.join(LIST_SEP));
  if (state.vendorIds.length) params.set("vendors", state.vendorIds.join(LIST_SEP));
  if (state.sourceFeeds.length) params.set("feeds", state.sourceFeeds.join(LIST_SEP));
  if (state.fileTypesInclude.length) params.set("files", state.fileTypesInclude.join(LIST_SEP));
  if (state.threshold !== null) params.set("thr", String(state.threshold));
  if (state.scoredByModelOnly) params.set("scored", "1");
  if (state.minCoveragePct !== 0) params.set("cov", String(state.minCoveragePct));
  if (state.advancedOpen) params.set("adv", "1");
  if (state.tab !== "metrics") params.set("tab", state.tab);
  if (state.groupBy !== "family") params.set("group", state.groupBy);
  if (state.substring) params.set("contains", state.substring);
  if (state.sortKey !== "group_key") params.set("sort", state.sortKey);
  if (state.descending) params.set("desc", "1");
  return params.toString();
}

function parseList(value: string | null): string[] {
  return value ? value.split(LIST_SEP).filter((v) => v.length > 0) : [];
}

export function parseState(search: string): FilterPanelState {
  const params = new URLSearchParams(search);
  const tab = params.get("tab");
  const groupBy = params.get("group");
  const threshold = params.get("thr");
  return {
    sourceFeeds: parseList(params.get("feeds")),
    timeFrom: params.get("from") ?? "",
    timeTo: params.get("to") ?? "",
    modelType: params.get("type") ?? DEFAULT_STATE.modelType,
    modelVersions: parseList(params.get("models")),
    vendorIds: parseList(params.get("vendors")),
    threshold: threshold === null ? null : Number(threshold),
    fileTypesInclude: parseList(params.get("files")),
    scoredByModelOnly: params.get("scored") === "1",
    minCoveragePct: params.get("cov") === null ? 0 : Number(params.get("cov")),
    advancedOpen: params.get("adv") === "1",
    tab: tab === "quality" || tab === "breakdown" ? tab : "metrics",
    groupBy: groupBy === "filetype" ? "filetype" : "family",
    substring: params.get("contains") ?? "",
    sortKey: params.get("sort") ?? "group_key",
    descending: params.get("desc") === "1",
  };
}

/** True when the URL carries no filter state and the meta defaults apply. */
export function isBlankUrl(search: string): boolean {
  const params = new URLSearchParams(search);
  return !params.get("from") && !params.get("to");
}
