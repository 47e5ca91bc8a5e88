/** Minimal SVG chart builders returning markup strings.
 *
 * Charts carry their own titles, axis labels and value labels so a
 * static screenshot stays fully informative. All text labels arrive
 * pre-formatted; this module never formats a number itself.
 */
import { escapeHtml } from "./format.js";

export interface Marker {
  x01: number;
  y01: number;
  glyph: string; // one character
  color: string;
  title: string;
}

export interface LineSeries {
  color: string;
  // y01 null = gap: the line breaks instead of dropping to zero
  points: (number | null)[];
  name: string;
}

export function hbar(options: {
  label: string;
  value01: number | null;
  valueText: string;
  color: string;
  warn?: boolean;
}): string {
  const width = options.value01 === null ? 0 : Math.round(options.value01 * 220);
  const warnClass = options.warn ? " warn-border" : "";
  return `<div class="hbar${warnClass}">` +
    `<span class="hbar-label">${escapeHtml(options.label)}</span>` +
    `<span class="hbar-track"><span class="hbar-fill" style="width:${width}px;background:${options.color}"></span></span>` +
    `<span class="hbar-value">${escapeHtml(options.valueText)}</span>` +
    `</div>`;
}

function polylineSegments(series: LineSeries, w: number, h: number, pad: number): string {
  const n = series.points.length;
  const step = n > 1 ? (w - 2 * pad) / (n - 1) : 0;
  const segments: string[] = [];
  let current: string[] = [];
  series.points.forEach((y01, i) => {
    if (y01 === null) {
      if (current.length) segments.push(current.join(" "));
      current = [];
      return;
    }
    const x = pad + i * step;
    const y = h - pad - y01 * (h - 2 * pad);
    current.push(`${x.toFixed(1)},${y.toFixed(1)}`);
  });
  if (current.length) segments.push(current.join(" "));
  return segments
    .map((pts) =>
      pts.includes(" ")
        ? `<polyline fill="none" stroke="${series.color}" stroke-width="1.5" points="${pts}"/>`
        : `<circle r="2" fill="${series.color}" cx="${pts.split(",")[0]}" cy="${pts.split(",")[1]}"/>`)
    .join("");
}

export function lineChart(options: {
  title: string;
  yLabel: string;
  yMaxText: string;
  series: LineSeries[];
  xFirstText: string;
  xLastText: string;
  markers?: Marker[];
  width?: number;
  height?: number;
}): string {
  const w = options.width ?? 420;
  const h = options.height ?? 140;
  const pad = 8;
  const lines = options.series.map((s) => polylineSegments(s, w, h, pad)).join("");
  const markers = (options.markers ?? [])
    .map((m) => {
      const x = pad + m.x01 * (w - 2 * pad);
      const y = h - pad - m.y01 * (h - 2 * pad);
      return `<text class="marker" x="${x.toFixed(1)}" y="${y.toFixed(1)}" fill="${m.color}">` +
        `<title>${escapeHtml(m.title)}</title>${m.glyph}</text>`;
    })
    .join("");
  return `<figure class="chart">` +
    `<figcaption>${escapeHtml(options.title)}</figcaption>` +
    `<div class="chart-ymax">${escapeHtml(options.yMaxText)}</div>` +
    `<svg viewBox="0 0 ${w} ${h}" role="img" aria-label="${escapeHtml(options.title)}">` +
    `<rect class="chart-bg" x="0" y="0" width="${w}" height="${h}"/>` +
    lines + markers +
    `</svg>` +
    `<div class="chart-xaxis"><span>${escapeHtml(options.xFirstText)}</span>` +
    `<span class="chart-ylabel">${escapeHtml(options.yLabel)}</span>` +
    `<span>${escapeHtml(options.xLastText)}</span></div>` +
    `</figure>`;
}

export function rocChart(options: {
  title: string;
  curves: { color: string; name: string; points: { fpr: number; tpr: number }[] }[];
  singlePoints: { color: string; name: string; fpr: number; tpr: number }[];
  aucTexts: string[];
}): string {
  const size = 180;
  const pad = 6;
  const scale = (v: number) => pad + v * (size - 2 * pad);
  const flip = (v: number) => size - pad - v * (size - 2 * pad);
  const curves = options.curves
    .map((c) => {
      const pts = c.points.map((p) => `${scale(p.fpr).toFixed(1)},${flip(p.tpr).toFixed(1)}`).join(" ");
      return `<polyline fill="none" stroke="${c.color}" stroke-width="1.5" points="${pts}"><title>${escapeHtml(c.name)}</title></polyline>`;
    })
    .join("");
  const dots = options.singlePoints
    .map((p) =>
      `<circle r="3" fill="${p.color}" cx="${scale(p.fpr).toFixed(1)}" cy="${flip(p.tpr).toFixed(1)}">` +
      `<title>${escapeHtml(p.name)}</title></circle>`)
    .join("");
  return `<figure class="chart roc">` +
    `<figcaption>${escapeHtml(options.title)}</figcaption>` +
    `<svg viewBox="0 0 ${size} ${size}" role="img" aria-label="${escapeHtml(options.title)}">` +
    `<rect class="chart-bg" x="0" y="0" width="${size}" height="${size}"/>` +
    `<line class="diag" x1="${pad}" y1="${size - pad}" x2="${size - pad}" y2="${pad}"/>` +
    curves + dots +
    `</svg>` +
    `<div class="chart-xaxis"><span class="chart-ylabel">TPR ↑</span><span>FPR →</span></div>` +
    `<div class="roc-auc">${options.aucTexts.map((t) => escapeHtml(t)).join(" · ")}</div>` +
    `</figure>`;
}

export function legend(entries: { name: string; color: string }[]): string {
  return `<div class="legend">` +
    entries
      .map((e) =>
        `<span class="legend-item"><span class="legend-swatch" style="background:${e.color}"></span>` +
        `${escapeHtml(e.name)}</span>`)
      .join("") +
    `</div>`;
}
