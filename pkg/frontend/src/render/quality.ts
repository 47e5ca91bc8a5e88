/** Data Quality tab: issue series, per-engine volume charts, anomaly markers. */
import type { AnomalyWire, QualityPayload } from "../api.js";
import { LABEL_CLASS_COLORS } from "../colors.js";
import { escapeHtml, fmtCount, fmtPct, fmtZ } from "../format.js";
import { legend, lineChart, Marker } from "../svg.js";
import { renderEmptyState } from "./states.js";

const ISSUE_METRICS: [keyof PickIssue, string, string][] = [
  ["pct_missing_source", "missing from input sources", "#b5651d"],
  ["pct_unlabeled", "no label", "#7d3c98"],
  ["pct_missing_filetype", "missing file type", "#2e86ab"],
];

interface PickIssue {
  pct_missing_source: number | null;
  pct_unlabeled: number | null;
  pct_missing_filetype: number | null;
}

const GLYPHS: Record<string, string> = { Spike: "▲", Drop: "▼", ZeroVolume: "○" };
const MARKER_COLORS: Record<string, string> = {
  Spike: "#c5423f", Drop: "#c5423f", ZeroVolume: "#7a7a7a",
};

function anomalyMarkers(
  anomalies: AnomalyWire[],
  seriesKey: string,
  days: string[],
  valueAt: (day: string) => number | null,
  yMax: number,
): Marker[] {
  const index = new Map(days.map((d, i) => [d, i]));
  return anomalies
    .filter((a) => a.series === seriesKey && index.has(a.day))
    .map((a) => {
      const value = valueAt(a.day);
      const y01 = value === null || yMax === 0 ? 0 : value / yMax;
      return {
        x01: days.length > 1 ? (index.get(a.day) as number) / (days.length - 1) : 0,
        y01: Math.min(1, y01),
        glyph: GLYPHS[a.direction] ?? "?",
        color: MARKER_COLORS[a.direction] ?? "#c5423f",
        title: `${a.direction} on ${a.day} (z=${fmtZ(a.robust_z)})`,
      };
    });
}

function issueChart(payload: QualityPayload): string {
  const days = payload.issue_series.map((d) => d.day);
  const values = payload.issue_series;
  const defined = values.flatMap((d) =>
    ISSUE_METRICS.map(([key]) => d[key]).filter((v): v is number => v !== null));
  const yMax = defined.length ? Math.max(...defined) : 0;
  const series = ISSUE_METRICS.map(([key, name, color]) => ({
    name,
    color,
    points: values.map((d) => {
      const v = d[key];
      return v === null ? null : yMax === 0 ? 0 : v / yMax;
    }),
  }));
  const markers = ISSUE_METRICS.flatMap(([key, , color]) =>
    anomalyMarkers(
      payload.anomalies, `issue:${key}`, days,
      (day) => values.find((d) => d.day === day)?.[key] ?? null, yMax,
    ).map((m) => ({ ...m, color })));
  return lineChart({
    title: "Data Issues over Time (% of rows per day)",
    yLabel: "% of rows",
    yMaxText: `max ${fmtPct(defined.length ? yMax : null)}`,
    series,
    xFirstText: days[0] ?? "",
    xLastText: days[days.length - 1] ?? "",
    markers,
  }) + legend(ISSUE_METRICS.map(([, name, color]) => ({ name, color })));
}

function volumeCharts(payload: QualityPayload): string {
  const engines = [...new Set(payload.volume_series.map((s) => s.engine_id))];
  const charts = engines.map((engineId) => {
    const perLabel = payload.volume_series.filter((s) => s.engine_id === engineId);
    const days = perLabel[0]?.points.map((p) => p.day) ?? [];
    const counts = perLabel.flatMap((s) => s.points.map((p) => p.count));
    const yMax = counts.length ? Math.max(...counts) : 0;
    const markers = perLabel.flatMap((s) =>
      anomalyMarkers(
        payload.anomalies, `volume:${engineId}:${s.label}`, days,
        (day) => s.points.find((p) => p.day === day)?.count ?? null, yMax,
      ));
    return lineChart({
      title: `Scanned volume per day — ${engineId}`,
      yLabel: "rows scanned",
      yMaxText: `max ${fmtCount(yMax)}`,
      series: perLabel.map((s) => ({
        name: s.label,
        color: LABEL_CLASS_COLORS[s.label] ?? "#888",
        points: s.points.map((p) => (yMax === 0 ? 0 : p.count / yMax)),
      })),
      xFirstText: days[0] ?? "",
      xLastText: days[days.length - 1] ?? "",
      markers,
      width: 420,
      height: 110,
    });
  });
  return charts.join("");
}

function anomalyTable(payload: QualityPayload): string {
  if (!payload.anomalies.length) {
    return `<p class="row-note">No anomalies flagged in this window.</p>`;
  }
  const rows = payload.anomalies
    .map((a) =>
      `<tr><td>${escapeHtml(a.day)}</td><td>${escapeHtml(a.direction)}</td>` +
      `<td>${escapeHtml(a.series)}</td><td>${fmtZ(a.robust_z)}</td></tr>`)
    .join("");
  return `<table class="data-table anomaly-table">` +
    `<thead><tr><th>day</th><th>direction</th><th>series</th><th>robust z</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`;
}

export function renderDataQuality(payload: QualityPayload): string {
  if (payload.empty) return renderEmptyState();
  return `<div class="tab-body" data-rowcount="${payload.row_count}">` +
    `<p class="row-note">${fmtCount(payload.row_count)} rows selected</p>` +
    `<section class="panel">${issueChart(payload)}</section>` +
    `<section class="panel"><h3>Volume of malicious, benign and unlabeled data scanned per engine</h3>` +
    legend(Object.entries(LABEL_CLASS_COLORS).map(([name, color]) => ({ name, color }))) +
    `<div class="volume-grid">${volumeCharts(payload)}</div></section>` +
    `<section class="panel"><h3>Anomaly flags</h3>${anomalyTable(payload)}</section>` +
    `</div>`;
}
