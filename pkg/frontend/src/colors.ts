/** Color assignment: categorical palette per engine, divergent ratio scale.
 *
 * Engines keep one color across every chart of a view (the map is built
 * once per payload from the engine order). Detection-ratio cells map the
 * backend's 0..6 bucket onto an orange-to-blue divergent ramp: low is
 * orange (trouble), high is blue.
 */

const CATEGORICAL = [
  "#4269d0", "#efb118", "#ff725c", "#6cc5b0", "#3ca951",
  "#ff8ab7", "#a463f2", "#97bbf5", "#9c6b4e", "#9498a0",
];

export type ColorMap = Map<string, string>;

export function engineColors(engineIds: string[]): ColorMap {
  const map: ColorMap = new Map();
  engineIds.forEach((id, i) => map.set(id, CATEGORICAL[i % CATEGORICAL.length]));
  return map;
}

// orange (bucket 0) -> neutral -> blue (bucket 6)
const DIVERGENT = [
  "#d95f02", "#e58a3a", "#f0b57d", "#e8e4db", "#a8c3e8", "#6f9bd8", "#2f6ec7",
];

export function bucketColor(bucket: number | null): string {
  if (bucket === null) return "transparent";
  return DIVERGENT[Math.max(0, Math.min(DIVERGENT.length - 1, bucket))];
}

export const LABEL_CLASS_COLORS: Record<string, string> = {
  Malicious: "#c5423f",
  Benign: "#4a86c8",
  Unlabeled: "#9a9a9a",
};
