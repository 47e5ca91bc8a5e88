/** Prediction Breakdown tab: sortable, filterable detection tables. */
import type { BreakdownPayload } from "../api.js";
import { bucketColor } from "../colors.js";
import { escapeHtml, fmtCount, fmtRate } from "../format.js";
import { renderEmptyState } from "./states.js";

export const SORTABLE_COLUMNS: [string, string][] = [
  ["group_key", "name"],
  ["detection_ratio", "detection ratio"],
  ["detected", "detected"],
  ["missed", "missed"],
  ["total_samples", "total"],
  ["endpoints", "endpoints"],
];

export function renderBreakdown(
  payload: BreakdownPayload,
  options: { sortKey: string; descending: boolean; substring: string },
): string {
  if (payload.empty) return renderEmptyState();
  const header = SORTABLE_COLUMNS
    .map(([key, title]) => {
      const active = key === options.sortKey
        ? `<span class="sort-arrow">${options.descending ? "↓" : "↑"}</span>`
        : "";
      return `<th><button class="sort-btn" data-sort="${key}">${escapeHtml(title)}${active}</button></th>`;
    })
    .join("");
  const rows = payload.rows
    .map((r) => {
      const ratioStyle = r.color_bucket === null
        ? ""
        : ` style="background:${bucketColor(r.color_bucket)}"`;
      return `<tr class="breakdown-row" data-group="${escapeHtml(r.group_key)}">` +
        `<td class="group-name">${escapeHtml(r.group_key)}` +
        (r.vendors.length
          ? `<span class="vendors">${escapeHtml(r.vendors.join(", "))}</span>`
          : "") +
        `</td>` +
        `<td class="ratio-cell"${ratioStyle}>${fmtRate(r.detection_ratio)}</td>` +
        `<td>${fmtCount(r.detected)}</td>` +
        `<td>${fmtCount(r.missed)}</td>` +
        `<td>${fmtCount(r.total_samples)}</td>` +
        `<td>${fmtCount(r.endpoints)}</td>` +
        `</tr>`;
    })
    .join("");
  return `<div class="tab-body">` +
    `<div class="table-tools">` +
    `<input type="search" id="breakdown-contains" placeholder="filter group names…" ` +
    `value="${escapeHtml(options.substring)}" aria-label="filter group names"/>` +
    `<span class="row-note">model: ${escapeHtml(payload.model)} · grouped by ` +
    `${escapeHtml(payload.group_by)} · detection ratio colored blue (high) to orange (low); ` +
    `click a row for details</span>` +
    `</div>` +
    `<table class="data-table breakdown-table">` +
    `<thead><tr>${header}</tr></thead><tbody>${rows}</tbody></table>` +
    `</div>`;
}
