/** Decoder for the service's run-length encoded label rows. */

export type RleRows = Array<Array<[number, number]>>;

export interface LabelMap {
  height: number;
  width: number;
  labels: Int32Array; // row-major
}

export function decodeRle(rows: RleRows, dims: [number, number]): LabelMap {
  const [height, width] = dims;
  if (rows.length !== height) {
    throw new Error(`rle has ${rows.length} rows, expected ${height}`);
  }
  const labels = new Int32Array(height * width);
  for (let r = 0; r < height; r++) {
    let c = 0;
    for (const [label, count] of rows[r]) {
      if (count <= 0) throw new Error(`non-positive run length in row ${r}`);
      labels.fill(label, r * width + c, r * width + c + count);
      c += count;
    }
    if (c !== width) {
      throw new Error(`row ${r} covers ${c} pixels, expected ${width}`);
    }
  }
  return { height, width, labels };
}

export function labelAt(map: LabelMap, row: number, col: number): number {
  return map.labels[row * map.width + col];
}
