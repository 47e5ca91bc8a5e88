/** Shared test helpers: fixture loading and numeral extraction. */
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { fmtCount, fmtPct, fmtRate, fmtZ } from "../src/format.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8")) as T;
}

/** Every formatted representation of every number in the payload. */
export function allowedNumerals(payload: unknown): { formatted: Set<string>; strings: string[] } {
  const formatted = new Set<string>();
  const strings: string[] = [];
  const walk = (node: unknown): void => {
    if (typeof node === "number") {
      formatted.add(String(node));
      formatted.add(fmtRate(node));
      formatted.add(fmtPct(node));
      formatted.add(fmtCount(node));
      formatted.add(fmtZ(node));
    } else if (typeof node === "string") {
      strings.push(node);
    } else if (Array.isArray(node)) {
      node.forEach(walk);
    } else if (node && typeof node === "object") {
      Object.values(node).forEach(walk);
    }
  };
  walk(payload);
  return { formatted, strings };
}

function unescapeEntities(text: string): string {
  return text
    .replace(/&lt;/g, "<")
    .replace(/&gt;/g, ">")
    .replace(/&quot;/g, '"')
    .replace(/&amp;/g, "&");
}

/** Visible text content of rendered markup (tags stripped, entities decoded). */
export function textContent(html: string): string {
  return unescapeEntities(html.replace(/<[^>]+>/g, " "));
}

/**
 * Numerals rendered as visible text that do not come from the payload.
 * Payload strings (dates, engine ids with digits) are removed before
 * tokenizing, so only free-standing numbers remain to be checked.
 */
export function unexplainedNumerals(html: string, payload: unknown): string[] {
  const { formatted, strings } = allowedNumerals(payload);
  let text = textContent(html);
  for (const s of [...new Set(strings)].sort((a, b) => b.length - a.length)) {
    if (s.length > 0) text = text.split(s).join(" ");
  }
  const tokens = text.match(/-?\d+(?:\.\d+)?%?/g) ?? [];
  return tokens.filter((token) => !formatted.has(token));
}
