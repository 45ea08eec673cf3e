/** View state and the unsubmitted-stroke queue. */
import type { BrushStroke } from "./raster.js";

export const THETA_MAX = Math.PI / 2;

export interface ViewState {
  activeLabel: number;
  brushRadius: number;
  theta: number;
  lambda: number;
  overlayOpacity: number;
  overlayVisible: boolean;
}

export function defaultViewState(): ViewState {
  return {
    activeLabel: 2,
    brushRadius: 2,
    theta: Math.PI / 4,
    lambda: 2.0,
    overlayOpacity: 0.5,
    overlayVisible: true,
  };
}

/** Slider values are clamped so requests never carry an out-of-range theta. */
export function setTheta(state: ViewState, value: number): ViewState {
  return { ...state, theta: Math.min(THETA_MAX, Math.max(0, value)) };
}

export function setLambda(state: ViewState, value: number): ViewState {
  return { ...state, lambda: Math.max(0, value) };
}

export function setOpacity(state: ViewState, value: number): ViewState {
  return { ...state, overlayOpacity: Math.min(1, Math.max(0, value)) };
}

export class StrokeQueue {
  private queued: BrushStroke[] = [];

  push(stroke: BrushStroke): void {
    this.queued.push(stroke);
  }

  /** Drops the last unsubmitted stroke; returns it for repaint bookkeeping. */
  undo(): BrushStroke | undefined {
    return this.queued.pop();
  }

  get pending(): readonly BrushStroke[] {
    return this.queued;
  }

  get size(): number {
    return this.queued.length;
  }

  /** Called after a successful submit; a 409 keeps the queue intact. */
  clear(): void {
    this.queued = [];
  }
}
