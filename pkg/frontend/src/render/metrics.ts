/** Model Metrics tab: TPR/FPR bars, sample ratios, series over time, ROC. */
import type { EngineMetricsEntry, MetricsPayload } from "../api.js";
import { engineColors, LABEL_CLASS_COLORS } from "../colors.js";
import { escapeHtml, fmtCount, fmtRate } from "../format.js";
import { hbar, legend, lineChart, rocChart } from "../svg.js";
import { renderEmptyState } from "./states.js";

function rateBars(
  title: string,
  engines: EngineMetricsEntry[],
  value: (e: EngineMetricsEntry) => number | null,
  colors: Map<string, string>,
  metric: string,
): string {
  const bars = engines
    .map((e) =>
      `<div class="cell-click" data-engine="${escapeHtml(e.engine_id)}" data-metric="${metric}">` +
      hbar({
        label: e.engine_id,
        value01: value(e),
        valueText: fmtRate(value(e)),
        color: colors.get(e.engine_id) ?? "#888",
        warn: e.low_coverage_warning,
      }) + `</div>`)
    .join("");
  return `<section class="panel"><h3>${escapeHtml(title)}</h3>${bars}</section>`;
}

function sampleRatioBars(engines: EngineMetricsEntry[]): string {
  const rows = engines
    .map((e) => {
      const classes: [string, number | null][] = [
        ["Malicious", e.sample_ratio.malicious],
        ["Benign", e.sample_ratio.benign],
        ["Unlabeled", e.sample_ratio.unlabeled],
      ];
      const stack = classes
        .map(([cls, ratio]) =>
          hbar({
            label: cls,
            value01: ratio,
            valueText: fmtRate(ratio),
            color: LABEL_CLASS_COLORS[cls],
            warn: false,
          }))
        .join("");
      const warn = e.low_coverage_warning ? " warn-border" : "";
      return `<div class="ratio-stack${warn}"><h4>${escapeHtml(e.engine_id)}</h4>${stack}</div>`;
    })
    .join("");
  return `<section class="panel"><h3>Sample Ratio per Engine (share of rows scanned)</h3>` +
    `${rows}</section>`;
}

function seriesChart(
  title: string,
  payload: MetricsPayload,
  pick: (p: { tpr: number | null; fpr: number | null }) => number | null,
  colors: Map<string, string>,
): string {
  const series = payload.time_series.map((s) => ({
    name: s.engine_id,
    color: colors.get(s.engine_id) ?? "#888",
    points: s.points.map(pick),
  }));
  const defined = series.flatMap((s) => s.points).filter((v): v is number => v !== null);
  const yMax = defined.length ? Math.max(...defined) : null;
  const days = payload.time_series[0]?.points.map((p) => p.day) ?? [];
  return lineChart({
    title,
    yLabel: "rate per day",
    yMaxText: `max ${fmtRate(yMax)}`,
    series: series.map((s) => ({
      ...s,
      points: s.points.map((v) => (v === null || yMax === null || yMax === 0 ? (v === null ? null : 0) : v / yMax)),
    })),
    xFirstText: days[0] ?? "",
    xLastText: days[days.length - 1] ?? "",
  });
}

export function renderModelMetrics(payload: MetricsPayload): string {
  if (payload.empty) return renderEmptyState();
  const colors = engineColors(payload.engines.map((e) => e.engine_id));
  const warned = payload.engines.filter((e) => e.low_coverage_warning);
  const warnNote = warned.length
    ? `<p class="warn-note">Red border: engine scanned less than the configured share of ` +
      `the selected data; its rates are not trustworthy at this coverage.</p>`
    : "";

  const rocFigures = payload.roc.map((entry) => {
    if (!entry.defined) {
      return `<div class="roc-undefined">ROC for ${escapeHtml(entry.engine_id)} is undefined ` +
        `on this selection (needs both labeled classes).</div>`;
    }
    return rocChart({
      title: `ROC — ${entry.engine_id}`,
      curves: [{
        color: colors.get(entry.engine_id) ?? "#888",
        name: entry.engine_id,
        points: entry.points.map((p) => ({ fpr: p.fpr, tpr: p.tpr })),
      }],
      singlePoints: payload.vendor_points
        .filter((v) => v.fpr !== null && v.tpr !== null)
        .map((v) => ({
          color: colors.get(v.engine_id) ?? "#888",
          name: v.engine_id,
          fpr: v.fpr as number,
          tpr: v.tpr as number,
        })),
      aucTexts: [`AUC ${fmtRate(entry.auc)}`],
    });
  }).join("");

  return `<div class="tab-body" data-rowcount="${payload.row_count}">` +
    `<p class="row-note">${fmtCount(payload.row_count)} rows selected</p>` +
    warnNote +
    legend(payload.engines.map((e) => ({
      name: e.engine_id,
      color: colors.get(e.engine_id) ?? "#888",
    }))) +
    `<div class="grid2">` +
    rateBars("TPR Detection (true positive rate)", payload.engines, (e) => e.tpr, colors, "TP") +
    rateBars("FPR (false positive rate)", payload.engines, (e) => e.fpr, colors, "FP") +
    `</div>` +
    sampleRatioBars(payload.engines) +
    `<div class="grid2">` +
    seriesChart("TPR over time per engine", payload, (p) => p.tpr, colors) +
    seriesChart("FPR over time per engine", payload, (p) => p.fpr, colors) +
    `</div>` +
    `<section class="panel"><h3>ROC curves (vendors drawn as single operating points)</h3>` +
    `<div class="roc-row">${rocFigures}</div></section>` +
    `</div>`;
}
