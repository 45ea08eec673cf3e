/** Label palette; must stay byte-identical with the server's overlay palette. */
export type Rgb = readonly [number, number, number];

export const PALETTE: readonly Rgb[] = [
  [0, 0, 0],        // 0 unlabeled
  [64, 64, 64],     // 1 background
  [228, 26, 28],    // 2
  [55, 126, 184],   // 3
  [77, 175, 74],    // 4
  [152, 78, 163],   // 5
  [255, 127, 0],    // 6
  [255, 255, 51],   // 7
  [166, 86, 40],    // 8
  [247, 129, 191],  // 9
  [0, 206, 209],    // 10
  [154, 205, 50],   // 11
  [255, 0, 255],    // 12
  [30, 144, 255],   // 13
  [210, 105, 30],   // 14
  [128, 128, 0],    // 15
];

export const OVERLAY_ALPHA = 0.5;

export function labelColor(label: number): Rgb {
  return PALETTE[label % PALETTE.length];
}

export function labelCss(label: number): string {
  const [r, g, b] = labelColor(label);
  return `rgb(${r}, ${g}, ${b})`;
}
