/** Empty-result, fetch-error and loading banners.
 *
 * An empty query result and a failed request must never look alike:
 * distinct classes, distinct wording, distinct roles.
 */
import { escapeHtml } from "../format.js";

export function renderEmptyState(): string {
  return `<div class="state state-empty" role="status">` +
    `<strong>No data matches your filters.</strong>` +
    `<p>The query ran fine but selected zero rows. Widen the time frame, ` +
    `lower the coverage slider, or clear the file-type filter.</p></div>`;
}

export function renderErrorState(message: string, violations: string[] = []): string {
  const detail = violations.length
    ? `<ul>${violations.map((v) => `<li>${escapeHtml(v)}</li>`).join("")}</ul>`
    : "";
  return `<div class="state state-error" role="alert">` +
    `<strong>Request failed.</strong>` +
    `<p>The service did not return a result: ${escapeHtml(message)}. ` +
    `This is a system problem, not an empty query.</p>${detail}</div>`;
}

export function renderLoadingState(): string {
  return `<div class="state state-loading" role="status">Loading…</div>`;
}
