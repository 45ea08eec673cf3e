/** Composites the label map over the grayscale/color image, like the server. */
import { labelColor, OVERLAY_ALPHA } from "./palette.js";
import type { LabelMap } from "./rle.js";

/**
 * Blend per-label palette colors over base RGBA pixels. `base` and the result
 * are RGBA byte arrays of length width*height*4; alpha of the result is 255.
 */
export function composeOverlay(
  base: Uint8ClampedArray, map: LabelMap,
  opacity: number = OVERLAY_ALPHA): Uint8ClampedArray<ArrayBuffer> {
  const n = map.width * map.height;
  if (base.length !== n * 4) {
    throw new Error(`base has ${base.length} bytes, expected ${n * 4}`);
  }
  const a = Math.min(1, Math.max(0, opacity));
  const out = new Uint8ClampedArray(n * 4);
  for (let p = 0; p < n; p++) {
    const [cr, cg, cb] = labelColor(map.labels[p]);
    out[4 * p] = Math.round((1 - a) * base[4 * p] + a * cr);
    out[4 * p + 1] = Math.round((1 - a) * base[4 * p + 1] + a * cg);
    out[4 * p + 2] = Math.round((1 - a) * base[4 * p + 2] + a * cb);
    out[4 * p + 3] = 255;
  }
  return out;
}

/** The exact blend the compositor applies for one pixel of a given label. */
export function blendedColor(gray: number, label: number,
                             opacity: number = OVERLAY_ALPHA): [number, number, number] {
  const [cr, cg, cb] = labelColor(label);
  const a = Math.min(1, Math.max(0, opacity));
  const mix = (base: number, tint: number) =>
    Math.min(255, Math.max(0, Math.round((1 - a) * base + a * tint)));
  return [mix(gray, cr), mix(gray, cg), mix(gray, cb)];
}
