/** Canonical display formatting.
 *
 * Every numeral rendered anywhere in the dashboard is one of these
 * functions applied to a payload field; the contract tests rely on that.
 */

export const GAP = "–"; // en dash for undefined/missing values

export function fmtRate(value: number | null): string {
  return value === null ? GAP : value.toFixed(3);
}

export function fmtPct(value: number | null): string {
  return value === null ? GAP : `${value.toFixed(1)}%`;
}

export function fmtCount(value: number): string {
  return String(value);
}

export function fmtZ(value: number | null): string {
  return value === null ? "∞" : value.toFixed(1);
}

export function escapeHtml(value: string): string {
  return value
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
