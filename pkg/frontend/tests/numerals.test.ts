import { describe, expect, it } from "vitest";

import type { BreakdownPayload, MetricsPayload, QualityPayload } from "../src/api.js";
import { renderBreakdown } from "../src/render/breakdown.js";
import { renderModelMetrics } from "../src/render/metrics.js";
import { renderDataQuality } from "../src/render/quality.js";
import { fixture, unexplainedNumerals } from "./helpers.js";

/**
 * The UI computes no metrics: every numeral rendered as visible text in
 * any of the three tabs must be a payload field under the view's
 * documented formatting (payload strings such as dates and engine ids
 * are matched verbatim before numeric tokens are checked).
 */
describe("every rendered numeral comes from the payload", () => {
  it("model metrics tab", () => {
    const payload = fixture<MetricsPayload>("metrics.json");
    expect(unexplainedNumerals(renderModelMetrics(payload), payload)).toEqual([]);
  });

  it("data quality tab", () => {
    const payload = fixture<QualityPayload>("quality.json");
    expect(unexplainedNumerals(renderDataQuality(payload), payload)).toEqual([]);
  });

  it("prediction breakdown tab (family)", () => {
    const payload = fixture<BreakdownPayload>("breakdown_family.json");
    const html = renderBreakdown(payload, {
      sortKey: "missed", descending: true, substring: "",
    });
    expect(unexplainedNumerals(html, payload)).toEqual([]);
  });

  it("prediction breakdown tab (file type)", () => {
    const payload = fixture<BreakdownPayload>("breakdown_filetype.json");
    const html = renderBreakdown(payload, {
      sortKey: "missed", descending: true, substring: "",
    });
    expect(unexplainedNumerals(html, payload)).toEqual([]);
  });
});
