/** Details drawer: the rows behind one chart element, with CSV download. */
import type { DetailsPayload, ElementRefWire } from "../api.js";
import { escapeHtml, fmtCount, fmtRate } from "../format.js";

export function elementTitle(element: ElementRefWire): string {
  if (element.group_by) return `${element.group_by}: ${element.group_key}`;
  const day = element.day ? ` on ${element.day}` : "";
  return `${element.engine_id} · ${element.metric}${day}`;
}

export function renderDetailsDrawer(
  payload: DetailsPayload,
  element: ElementRefWire,
): string {
  const pages = Math.max(1, Math.ceil(payload.total / payload.page_size));
  const rows = payload.rows
    .map((r) =>
      `<tr>` +
      `<td class="mono">${escapeHtml(r.artifact_id.slice(0, 16))}…</td>` +
      `<td>${escapeHtml(r.ingest_day)}</td>` +
      `<td>${escapeHtml(r.file_type ?? "–")}</td>` +
      `<td>${escapeHtml(r.label)} <span class="reason">(${escapeHtml(r.label_reason)})</span></td>` +
      `<td>${fmtRate(r.vote_score)}</td>` +
      `<td>${escapeHtml(r.family)}</td>` +
      `<td>${fmtCount(r.endpoint_count)}</td>` +
      `</tr>`)
    .join("");
  const body = payload.total === 0
    ? `<p class="state state-empty">This chart element has no contributing rows.</p>`
    : `<table class="data-table details-table">` +
      `<thead><tr><th>artifact</th><th>ingested</th><th>file type</th>` +
      `<th>label</th><th>vote</th><th>family</th><th>endpoints</th></tr></thead>` +
      `<tbody>${rows}</tbody></table>`;
  return `<div class="drawer-head">` +
    `<h3>Details — ${escapeHtml(elementTitle(element))}</h3>` +
    `<span class="row-note">${fmtCount(payload.total)} rows · page ` +
    `${fmtCount(payload.page + 1)} of ${fmtCount(pages)}</span>` +
    `<button id="details-prev" ${payload.page === 0 ? "disabled" : ""}>← prev</button>` +
    `<button id="details-next" ${payload.page + 1 >= pages ? "disabled" : ""}>next →</button>` +
    `<button id="details-csv">Download CSV</button>` +
    `<button id="details-close" aria-label="close">×</button>` +
    `</div>` + body;
}
