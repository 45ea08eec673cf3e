/** Browser entry point: canvas painting, slider controls, run/overlay loop. */
import { ApiError, SessionClient, SegmentResult } from "./api.js";
import { composeOverlay } from "./overlay.js";
import { labelCss } from "./palette.js";
import { BrushStroke, Point, rasterizeStroke } from "./raster.js";
import { decodeRle, LabelMap } from "./rle.js";
import {
  defaultViewState, setLambda, setOpacity, setTheta, StrokeQueue, THETA_MAX,
  ViewState,
} from "./state.js";

const SERVICE_URL =
  new URLSearchParams(location.search).get("service") ?? "http://localhost:8800";

let state: ViewState = defaultViewState();
const queue = new StrokeQueue();
const client = new SessionClient(SERVICE_URL);

let dims: [number, number] | null = null;
let baseImage: ImageData | null = null;
let lastMap: LabelMap | null = null;
let currentPath: Point[] = [];
let painting = false;
let runInFlight = false;

const canvas = document.getElementById("view") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const banner = document.getElementById("banner")!;
const energyBox = document.getElementById("energy")!;
const sessionBox = document.getElementById("session")!;

function showBanner(text: string): void {
  banner.textContent = text;
  banner.classList.remove("hidden");
}

function hideBanner(): void {
  banner.classList.add("hidden");
}

function zoom(): number {
  if (!dims) return 1;
  return Math.max(1, Math.floor(Math.min(640 / dims[1], 640 / dims[0])));
}

function redraw(): void {
  if (!dims || !baseImage) return;
  const z = zoom();
  canvas.width = dims[1] * z;
  canvas.height = dims[0] * z;
  const frame = state.overlayVisible && lastMap
    ? new ImageData(composeOverlay(baseImage.data, lastMap, state.overlayOpacity),
                    dims[1], dims[0])
    : baseImage;
  const off = new OffscreenCanvas(dims[1], dims[0]);
  off.getContext("2d")!.putImageData(frame, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
  // pending strokes are drawn exactly as the pixels that will be submitted
  for (const stroke of queue.pending.concat(
      painting && currentPath.length
        ? [{ label: state.activeLabel, path: currentPath, radius: state.brushRadius }]
        : [])) {
    ctx.fillStyle = labelCss(stroke.label);
    for (const p of rasterizeStroke(stroke, dims[0], dims[1])) {
      ctx.fillRect(p.col * z, p.row * z, z, z);
    }
  }
}

function canvasToPixel(ev: MouseEvent): Point {
  const rect = canvas.getBoundingClientRect();
  const z = zoom();
  return {
    row: Math.floor((ev.clientY - rect.top) / z),
    col: Math.floor((ev.clientX - rect.left) / z),
  };
}

async function loadImageFile(file: File): Promise<void> {
  const bytes = new Uint8Array(await file.arrayBuffer());
  try {
    const info = await client.createSession(new Blob([bytes], { type: "image/png" }));
    dims = [info.dims[0], info.dims[1]];
  } catch (err) {
    showBanner(err instanceof ApiError ? err.detail : String(err));
    return;
  }
  const bmp = await createImageBitmap(new Blob([bytes]));
  const off = new OffscreenCanvas(bmp.width, bmp.height);
  const octx = off.getContext("2d")!;
  octx.drawImage(bmp, 0, 0);
  baseImage = octx.getImageData(0, 0, bmp.width, bmp.height);
  lastMap = null;
  sessionBox.textContent = `session ${client.sessionId} (${dims[0]}x${dims[1]})`;
  hideBanner();
  redraw();
}

async function submitQueued(): Promise<boolean> {
  if (!dims || queue.size === 0) return true;
  try {
    await client.submitStrokes(queue.pending, dims[0], dims[1]);
    queue.clear();
    return true;
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      showBanner("busy: strokes stay queued");
      return false; // keep the queue, retry later
    }
    showBanner(err instanceof ApiError ? err.detail : String(err));
    return false;
  }
}

function describeEnergy(result: SegmentResult): string {
  const e = result.energy;
  const counts = Object.entries(result.counts)
    .map(([k, v]) => `${k}: ${v}px`).join(", ");
  return `E=${e.total.toFixed(3)} (data ${e.data.toFixed(3)}, `
    + `smooth ${e.smoothness.toFixed(3)}, shape ${e.hedgehog}) | ${counts} | `
    + `theta=${result.config_used.theta.toFixed(3)}`;
}

async function runSegmentation(): Promise<void> {
  if (!dims || runInFlight) return;
  runInFlight = true;
  try {
    if (!(await submitQueued())) return;
    const result = await client.segment(state.theta, state.lambda);
    // previous overlay stays visible until the new map replaces it here
    lastMap = decodeRle(result.labeling.rle_rows, result.labeling.dims);
    energyBox.textContent = describeEnergy(result);
    hideBanner();
    redraw();
  } catch (err) {
    if (err instanceof ApiError && err.violatedEdges.length) {
      const edges = err.violatedEdges.slice(0, 6)
        .map((e) => `label ${e.label}: (${e.p}) -> (${e.q})`).join("; ");
      showBanner(`over-constrained, adjust theta or scribbles: ${edges}`);
    } else {
      showBanner(err instanceof ApiError ? err.detail : String(err));
    }
  } finally {
    runInFlight = false;
  }
}

function wireControls(): void {
  const labelSel = document.getElementById("label") as HTMLSelectElement;
  for (let k = 1; k <= 6; k++) {
    const opt = document.createElement("option");
    opt.value = String(k);
    opt.textContent = k === 1 ? "1 (background)" : String(k);
    opt.style.color = labelCss(k);
    labelSel.appendChild(opt);
  }
  labelSel.value = String(state.activeLabel);
  labelSel.onchange = () => { state.activeLabel = Number(labelSel.value); };

  const radius = document.getElementById("radius") as HTMLInputElement;
  radius.oninput = () => { state.brushRadius = Number(radius.value); };

  const theta = document.getElementById("theta") as HTMLInputElement;
  theta.max = String(THETA_MAX);
  theta.oninput = () => {
    state = setTheta(state, Number(theta.value));
    document.getElementById("theta-value")!.textContent = state.theta.toFixed(3);
  };

  const lambda = document.getElementById("lambda") as HTMLInputElement;
  lambda.oninput = () => { state = setLambda(state, Number(lambda.value)); };

  const opacity = document.getElementById("opacity") as HTMLInputElement;
  opacity.oninput = () => {
    state = setOpacity(state, Number(opacity.value));
    redraw();
  };

  const visible = document.getElementById("overlay-visible") as HTMLInputElement;
  visible.onchange = () => {
    state.overlayVisible = visible.checked;
    redraw();
  };

  (document.getElementById("run") as HTMLButtonElement).onclick = runSegmentation;
  (document.getElementById("undo") as HTMLButtonElement).onclick = () => {
    queue.undo();
    redraw();
  };
  (document.getElementById("submit") as HTMLButtonElement).onclick = submitQueued;

  const fileInput = document.getElementById("file") as HTMLInputElement;
  fileInput.onchange = () => {
    if (fileInput.files?.length) void loadImageFile(fileInput.files[0]);
  };
  const attach = document.getElementById("attach") as HTMLButtonElement;
  attach.onclick = async () => {
    const id = prompt("session id");
    if (!id) return;
    try {
      const info = await client.attach(id);
      dims = info.dims;
      sessionBox.textContent = `session ${id} (${dims[0]}x${dims[1]})`;
    } catch (err) {
      showBanner(err instanceof ApiError ? err.detail : String(err));
    }
  };

  canvas.onmousedown = (ev) => {
    if (!dims) return;
    painting = true;
    currentPath = [canvasToPixel(ev)];
    redraw();
  };
  canvas.onmousemove = (ev) => {
    if (!painting) return;
    currentPath.push(canvasToPixel(ev));
    redraw();
  };
  const finish = () => {
    if (!painting) return;
    painting = false;
    if (currentPath.length) {
      queue.push({
        label: state.activeLabel,
        path: currentPath,
        radius: state.brushRadius,
      } as BrushStroke);
    }
    currentPath = [];
    redraw();
  };
  canvas.onmouseup = finish;
  canvas.onmouseleave = finish;

  document.addEventListener("dragover", (ev) => ev.preventDefault());
  document.addEventListener("drop", (ev) => {
    ev.preventDefault();
    const file = ev.dataTransfer?.files?.[0];
    if (file) void loadImageFile(file);
  });
}

wireControls();
