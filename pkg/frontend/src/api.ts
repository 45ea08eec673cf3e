/** Thin client for the segmentation session service. */
import type { BrushStroke } from "./raster.js";
import { rasterizeStroke } from "./raster.js";
import type { RleRows } from "./rle.js";

export interface SessionInfo {
  id: string;
  dims: [number, number];
  channels: number;
}

export interface EnergyBreakdown {
  data: number;
  smoothness: number;
  hedgehog: number;
  total: number;
}

export interface SegmentResult {
  labeling: { rle_rows: RleRows; dims: [number, number] };
  energy: EnergyBreakdown;
  counts: Record<string, number>;
  config_used: { theta: number; lambda: number; neighborhood: number };
}

export interface ViolatedEdge {
  label: number;
  p: [number, number];
  q: [number, number];
}

export class ApiError extends Error {
  constructor(public status: number, public detail: string,
              public violatedEdges: ViolatedEdge[] = []) {
    super(`${status}: ${detail}`);
  }
}

async function raise(resp: Response): Promise<never> {
  let detail = resp.statusText;
  let edges: ViolatedEdge[] = [];
  try {
    const body = await resp.json();
    detail = body.detail ?? detail;
    edges = body.violated_edges ?? [];
  } catch {
    /* non-JSON error body */
  }
  throw new ApiError(resp.status, detail, edges);
}

export class SessionClient {
  constructor(public baseUrl: string, public sessionId: string = "") {}

  async createSession(png: Blob | Uint8Array): Promise<SessionInfo> {
    const resp = await fetch(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "content-type": "image/png" },
      body: png as BodyInit,
    });
    if (!resp.ok) await raise(resp);
    const info = (await resp.json()) as SessionInfo;
    this.sessionId = info.id;
    return info;
  }

  async attach(sessionId: string): Promise<{ dims: [number, number] }> {
    const resp = await fetch(`${this.baseUrl}/sessions/${sessionId}`);
    if (!resp.ok) await raise(resp);
    this.sessionId = sessionId;
    return (await resp.json()) as { dims: [number, number] };
  }

  /** Rasterizes the queued strokes and posts the pixel sets. */
  async submitStrokes(strokes: readonly BrushStroke[], height: number,
                      width: number): Promise<Record<string, number>> {
    const payload = {
      strokes: strokes.map((s) => ({
        label: s.label,
        pixels: rasterizeStroke(s, height, width).map((p) => [p.row, p.col]),
      })),
    };
    const resp = await fetch(
      `${this.baseUrl}/sessions/${this.sessionId}/scribbles`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(payload),
      },
    );
    if (!resp.ok) await raise(resp);
    return (await resp.json()).counts as Record<string, number>;
  }

  async segment(theta: number, lambda: number): Promise<SegmentResult> {
    const resp = await fetch(
      `${this.baseUrl}/sessions/${this.sessionId}/segment`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ theta, lambda }),
      },
    );
    if (!resp.ok) await raise(resp);
    return (await resp.json()) as SegmentResult;
  }

  overlayUrl(): string {
    return `${this.baseUrl}/sessions/${this.sessionId}/overlay.png`;
  }
}
