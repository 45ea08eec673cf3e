/** Client-side stroke rasterization: the server only ever sees pixel sets. */

export interface Point {
  row: number;
  col: number;
}

export interface BrushStroke {
  label: number;
  path: Point[];
  radius: number;
}

function bresenham(a: Point, b: Point): Point[] {
  const points: Point[] = [];
  let r0 = Math.round(a.row);
  let c0 = Math.round(a.col);
  const r1 = Math.round(b.row);
  const c1 = Math.round(b.col);
  const dr = Math.abs(r1 - r0);
  const dc = Math.abs(c1 - c0);
  const sr = r0 < r1 ? 1 : -1;
  const sc = c0 < c1 ? 1 : -1;
  let err = dc - dr;
  for (;;) {
    points.push({ row: r0, col: c0 });
    if (r0 === r1 && c0 === c1) break;
    const e2 = 2 * err;
    if (e2 > -dr) {
      err -= dr;
      c0 += sc;
    }
    if (e2 < dc) {
      err += dc;
      r0 += sr;
    }
  }
  return points;
}

function diskOffsets(radius: number): Point[] {
  const out: Point[] = [];
  const r = Math.max(0, Math.floor(radius - 1e-9));
  for (let dr = -r; dr <= r; dr++) {
    for (let dc = -r; dc <= r; dc++) {
      if (dr * dr + dc * dc <= radius * radius - 1e-9 || (dr === 0 && dc === 0)) {
        out.push({ row: dr, col: dc });
      }
    }
  }
  return out;
}

/**
 * Rasterize a brush stroke: a disk of the given radius stamped along the
 * Bresenham line through the path, clipped to the image bounds, deduplicated,
 * and returned in row-major order. Radius 1 with a single-point path yields
 * exactly one pixel (the single-click case).
 */
export function rasterizeStroke(stroke: BrushStroke, height: number,
                                width: number): Point[] {
  const seen = new Set<number>();
  const disk = diskOffsets(stroke.radius);
  let centers: Point[] = [];
  if (stroke.path.length === 1) {
    centers = [stroke.path[0]];
  } else {
    for (let i = 0; i + 1 < stroke.path.length; i++) {
      centers = centers.concat(bresenham(stroke.path[i], stroke.path[i + 1]));
    }
  }
  for (const c of centers) {
    for (const o of disk) {
      const row = Math.round(c.row) + o.row;
      const col = Math.round(c.col) + o.col;
      if (row < 0 || row >= height || col < 0 || col >= width) continue;
      seen.add(row * width + col);
    }
  }
  return Array.from(seen)
    .sort((x, y) => x - y)
    .map((p) => ({ row: Math.floor(p / width), col: p % width }));
}
