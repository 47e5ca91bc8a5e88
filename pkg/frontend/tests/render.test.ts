import { describe, expect, it } from "vitest";

import type {
  BreakdownPayload,
  DetailsPayload,
  MetricsPayload,
  QualityPayload,
} from "../src/api.js";
import { renderBreakdown } from "../src/render/breakdown.js";
import { renderDetailsDrawer } from "../src/render/details.js";
import { renderModelMetrics } from "../src/render/metrics.js";
import { renderDataQuality } from "../src/render/quality.js";
import { renderEmptyState, renderErrorState } from "../src/render/states.js";
import { fixture, textContent } from "./helpers.js";

const metrics = fixture<MetricsPayload>("metrics.json");
const metricsEmpty = fixture<MetricsPayload>("metrics_empty.json");
const quality = fixture<QualityPayload>("quality.json");
const breakdownFamily = fixture<BreakdownPayload>("breakdown_family.json");
const details = fixture<DetailsPayload>("details.json");

const BREAKDOWN_OPTS = { sortKey: "missed", descending: true, substring: "" };

describe("red border", () => {
  it("is present for exactly the engines whose warning flag is set", () => {
    const html = renderModelMetrics(metrics);
    const flagged = metrics.engines.filter((e) => e.low_coverage_warning);
    const unflagged = metrics.engines.filter((e) => !e.low_coverage_warning);
    expect(flagged.length).toBeGreaterThan(0);
    expect(unflagged.length).toBeGreaterThan(0);

    // one warn-border per chart surface (TPR bar, FPR bar, ratio stack) per flagged engine
    const count = (html.match(/warn-border/g) ?? []).length;
    expect(count).toBe(flagged.length * 3);
    for (const engine of flagged) {
      const bar = new RegExp(
        `<div class="hbar warn-border"><span class="hbar-label">${engine.engine_id}`);
      expect(html).toMatch(bar);
    }
    for (const engine of unflagged) {
      const bar = new RegExp(
        `<div class="hbar warn-border"><span class="hbar-label">${engine.engine_id}`);
      expect(html).not.toMatch(bar);
    }
  });

  it("disappears when no flag is set", () => {
    const calm = {
      ...metrics,
      engines: metrics.engines.map((e) => ({ ...e, low_coverage_warning: false })),
    };
    expect(renderModelMetrics(calm)).not.toContain("warn-border");
  });
});

describe("empty versus error states", () => {
  it("renders an empty payload as the empty state, not an error", () => {
    const html = renderModelMetrics(metricsEmpty);
    expect(metricsEmpty.empty).toBe(true);
    expect(html).toContain("state-empty");
    expect(html).not.toContain("state-error");
  });

  it("keeps the two states visually and semantically distinct", () => {
    const empty = renderEmptyState();
    const error = renderErrorState("request failed: 500", ["boom"]);
    expect(empty).toContain('class="state state-empty"');
    expect(error).toContain('class="state state-error"');
    expect(empty).toContain('role="status"');
    expect(error).toContain('role="alert"');
    expect(textContent(empty)).toContain("No data matches your filters");
    expect(textContent(error)).toContain("Request failed");
    expect(textContent(error)).not.toContain("No data matches");
  });

  it("lists the machine-readable violations in the error state", () => {
    const html = renderErrorState("request failed: 400", ["threshold out of range [0,1]: 1.5"]);
    expect(textContent(html)).toContain("threshold out of range");
  });
});

describe("model metrics view", () => {
  const html = renderModelMetrics(metrics);

  it("shows every TPR and FPR verbatim", () => {
    const text = textContent(html);
    for (const engine of metrics.engines) {
      if (engine.tpr !== null) expect(text).toContain(engine.tpr.toFixed(3));
      if (engine.fpr !== null) expect(text).toContain(engine.fpr.toFixed(3));
    }
  });

  it("renders sample ratios for all three label classes", () => {
    for (const engine of metrics.engines) {
      const { malicious, benign, unlabeled } = engine.sample_ratio;
      for (const ratio of [malicious, benign, unlabeled]) {
        if (ratio !== null) expect(textContent(html)).toContain(ratio.toFixed(3));
      }
    }
  });

  it("draws the ROC with its AUC and vendor operating points", () => {
    const defined = metrics.roc.filter((r) => r.defined);
    expect(defined.length).toBeGreaterThan(0);
    for (const entry of defined) {
      expect(textContent(html)).toContain(`AUC ${entry.auc!.toFixed(3)}`);
    }
    const dots = (html.match(/<circle/g) ?? []).length;
    expect(dots).toBeGreaterThanOrEqual(metrics.vendor_points
      .filter((v) => v.fpr !== null && v.tpr !== null).length);
  });

  it("renders time-series gaps as line breaks, never zeros", () => {
    const gappy: MetricsPayload = {
      ...metrics,
      time_series: [{
        engine_id: "OFFICE_20200915",
        points: [
          { day: "2020-07-01", tpr: 0.9, fpr: 0.1, n_labeled: 10 },
          { day: "2020-07-02", tpr: null, fpr: null, n_labeled: 0 },
          { day: "2020-07-03", tpr: 0.8, fpr: 0.1, n_labeled: 10 },
        ],
      }],
    };
    const out = renderModelMetrics(gappy);
    const tprChart = out.slice(out.indexOf("TPR over time"), out.indexOf("FPR over time"));
    const polylines = (tprChart.match(/<polyline/g) ?? []).length;
    expect(polylines).toBe(0); // two isolated points render as dots, not a line through the gap
    expect((tprChart.match(/<circle/g) ?? []).length).toBe(2);
  });

  it("labels the axes so a static screenshot stays readable", () => {
    const text = textContent(html);
    expect(text).toContain("TPR over time per engine");
    expect(text).toContain(metrics.time_series[0].points[0].day);
    const last = metrics.time_series[0].points.at(-1)!.day;
    expect(text).toContain(last);
  });
});

describe("data quality view", () => {
  const html = renderDataQuality(quality);

  it("marks anomalies on their day with direction glyphs", () => {
    expect(quality.anomalies.length).toBeGreaterThan(0);
    expect(html).toContain('class="marker"');
    const spikes = quality.anomalies.filter((a) => a.direction === "Spike");
    if (spikes.length) expect(html).toContain("▲");
  });

  it("lists every anomaly in the flag table", () => {
    const text = textContent(html);
    for (const anomaly of quality.anomalies.slice(0, 20)) {
      expect(text).toContain(anomaly.day);
      expect(text).toContain(anomaly.direction);
    }
  });

  it("renders one volume chart per engine", () => {
    const engines = new Set(quality.volume_series.map((s) => s.engine_id));
    for (const engine of engines) {
      expect(textContent(html)).toContain(`Scanned volume per day — ${engine}`);
    }
  });
});

describe("breakdown view", () => {
  const html = renderBreakdown(breakdownFamily, BREAKDOWN_OPTS);

  it("renders every group with its counts and ratio", () => {
    const text = textContent(html);
    for (const row of breakdownFamily.rows) {
      expect(text).toContain(row.group_key);
      expect(text).toContain(String(row.missed));
      if (row.detection_ratio !== null) {
        expect(text).toContain(row.detection_ratio.toFixed(3));
      }
    }
  });

  it("colors detection-ratio cells from the backend bucket only", () => {
    for (const row of breakdownFamily.rows) {
      if (row.color_bucket === null) continue;
      expect(html).toContain("ratio-cell");
    }
    const colored = (html.match(/class="ratio-cell" style="background:/g) ?? []).length;
    expect(colored).toBe(breakdownFamily.rows.filter((r) => r.color_bucket !== null).length);
  });

  it("shows the active sort key with its direction", () => {
    expect(html).toContain('data-sort="missed"');
    expect(html).toContain("↓");
  });

  it("marks rows clickable for the details drawer", () => {
    const rows = (html.match(/class="breakdown-row"/g) ?? []).length;
    expect(rows).toBe(breakdownFamily.rows.length);
  });
});

describe("details drawer", () => {
  it("renders the contributing rows and the CSV button", () => {
    const html = renderDetailsDrawer(details, {
      engine_id: "OFFICE_20200915", metric: "FN",
    });
    const text = textContent(html);
    expect(text).toContain(`${details.total} rows`);
    expect(html).toContain('id="details-csv"');
    for (const row of details.rows.slice(0, 5)) {
      expect(text).toContain(row.ingest_day);
      expect(text).toContain(row.label);
    }
  });
});
