import { describe, expect, it } from "vitest";

import type { MetaPayload } from "../src/api.js";
import {
  DEFAULT_STATE,
  encodeState,
  FilterPanelState,
  isBlankUrl,
  parseState,
  stateFromDefaults,
  toQuerySpec,
} from "../src/state.js";
import { fixture } from "./helpers.js";

const FULL: FilterPanelState = {
  sourceFeeds: ["feed-alpha", "feed-beta"],
  timeFrom: "2020-07-01",
  timeTo: "2020-07-30",
  modelType: "Office",
  modelVersions: ["OFFICE_20200915"],
  vendorIds: ["vendor-alpha", "vendor-echo"],
  threshold: 0.35,
  fileTypesInclude: ["Excel-OPC", "Word-OPC"],
  scoredByModelOnly: true,
  minCoveragePct: 50,
  advancedOpen: true,
  tab: "breakdown",
  groupBy: "filetype",
  substring: "excel",
  sortKey: "missed",
  descending: true,
};

describe("URL round-trip", () => {
  it("reproduces the identical state from its encoding", () => {
    expect(parseState(encodeState(FULL))).toEqual(FULL);
  });

  it("round-trips the sparse default-ish state", () => {
    const sparse: FilterPanelState = {
      ...DEFAULT_STATE,
      timeFrom: "2020-07-01",
      timeTo: "2020-07-14",
      modelVersions: ["m"],
    };
    expect(parseState(encodeState(sparse))).toEqual(sparse);
  });

  it("round-trips tab and advanced flags independently", () => {
    for (const tab of ["metrics", "quality", "breakdown"] as const) {
      for (const advancedOpen of [false, true]) {
        const state = { ...FULL, tab, advancedOpen };
        expect(parseState(encodeState(state))).toEqual(state);
      }
    }
  });

  it("survives a browser-style search prefix", () => {
    expect(parseState(`?${encodeState(FULL)}`)).toEqual(FULL);
  });
});

describe("QuerySpec serialization", () => {
  it("matches the wire schema one-to-one", () => {
    expect(toQuerySpec(FULL)).toEqual({
      source_feeds: ["feed-alpha", "feed-beta"],
      time_from: "2020-07-01",
      time_to: "2020-07-30",
      model_type: "Office",
      model_versions: ["OFFICE_20200915"],
      vendor_ids: ["vendor-alpha", "vendor-echo"],
      threshold: 0.35,
      file_types_include: ["Excel-OPC", "Word-OPC"],
      scored_by_model_only: true,
      min_coverage_pct: 50,
    });
  });

  it("keeps UI-only fields out of the query", () => {
    const spec = toQuerySpec(FULL) as unknown as Record<string, unknown>;
    expect(spec).not.toHaveProperty("tab");
    expect(spec).not.toHaveProperty("advancedOpen");
  });
});

describe("first-load defaults", () => {
  it("applies the meta defaults (latest model, last two weeks) on a blank URL", () => {
    const meta = fixture<MetaPayload>("meta.json");
    expect(meta.defaults).not.toBeNull();
    expect(isBlankUrl("")).toBe(true);
    expect(isBlankUrl(`?${encodeState(FULL)}`)).toBe(false);
    const state = stateFromDefaults(meta.defaults!);
    expect(state.tab).toBe("metrics");
    expect(state.advancedOpen).toBe(false);
    expect(toQuerySpec(state)).toEqual(meta.defaults);
  });
});
