/** Fixed 20-color palette; entity k wears palette[k % 20] and keeps a
 * numeric badge, so colors may repeat but identities never blur. */
export const PALETTE: readonly string[] = [
  "#e6194b", "#3cb44b", "#ffe119", "#4363d8", "#f58231",
  "#911eb4", "#46f0f0", "#f032e6", "#bcf60c", "#fabebe",
  "#008080", "#e6beff", "#9a6324", "#fffac8", "#800000",
  "#aaffc3", "#808000", "#ffd8b1", "#000075", "#808080",
];

export function entityColor(clusterIndex: number): string {
  return PALETTE[clusterIndex % PALETTE.length];
}

export function entityLabel(clusterIndex: number): string {
  return `e${clusterIndex + 1}`;
}
