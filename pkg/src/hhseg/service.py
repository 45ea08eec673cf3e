"""HTTP sessions for the interactive scribble loop.

One session holds an uploaded image, cumulative scribbles, and the latest
result. Segmentation runs synchronously under a per-session mutex; a second
request while one is running gets 409. Label maps travel as run-length
encoded rows so any client can decode them trivially.
"""
from __future__ import annotations

import io
import json
import math
import os
import secrets
import threading
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import imageio
from .grid import GridError, GridImage, Labeling, ScribbleSet
from .optimize import (EnergyBreakdown, OverConstrainedError, SolverConfig,
                       segment)

DEFAULT_MAX_PIXELS = 512 * 512


@dataclass
class Session:
    id: str
    image: GridImage
    scribbles: dict[int, set[int]] = dc_field(default_factory=dict)
    config: SolverConfig = dc_field(default_factory=SolverConfig)
    labeling: Labeling | None = None
    energy: EnergyBreakdown | None = None
    lock: threading.Lock = dc_field(default_factory=threading.Lock)

    @property
    def status(self) -> str:
        if self.lock.acquire(blocking=False):
            self.lock.release()
            return "idle"
        return "running"

    def scribble_set(self) -> ScribbleSet:
        return ScribbleSet.from_dict({k: sorted(v) for k, v in self.scribbles.items() if v})


def rle_encode_rows(labeling: Labeling, dims) -> list[list[list[int]]]:
    """Per row: [[label, run_length], ...] covering the row exactly."""
    arr = labeling.assignment.reshape(dims)
    rows = []
    for r in range(dims[0]):
        row = arr[r]
        change = np.flatnonzero(row[1:] != row[:-1]) + 1
        starts = np.concatenate([[0], change])
        ends = np.concatenate([change, [dims[1]]])
        rows.append([[int(row[s]), int(e - s)] for s, e in zip(starts, ends)])
    return rows


def create_app(store_dir: str | None = None, max_pixels: int | None = None) -> FastAPI:
    store_dir = store_dir if store_dir is not None else os.environ.get("HHSEG_STORE_DIR")
    if max_pixels is None:
        max_pixels = int(os.environ.get("HHSEG_MAX_PIXELS", DEFAULT_MAX_PIXELS))

    app = FastAPI(title="hhseg session service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[os.environ.get("HHSEG_UI_ORIGIN", "*")],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions: dict[str, Session] = {}
    app.state.sessions = sessions

    def persist(sess: Session) -> None:
        if not store_dir:
            return
        root = Path(store_dir) / sess.id
        root.mkdir(parents=True, exist_ok=True)
        imageio.save_image_png(sess.image, root / "image.png")
        (root / "scribbles.json").write_text(json.dumps(
            {str(k): sorted(v) for k, v in sess.scribbles.items()}))
        (root / "config.json").write_text(json.dumps({
            "theta": sess.config.theta, "lambda": sess.config.lam,
            "neighborhood": sess.config.neighborhood_size}))

    def restore() -> None:
        if not store_dir or not Path(store_dir).is_dir():
            return
        for root in sorted(Path(store_dir).iterdir()):
            img_path = root / "image.png"
            if not img_path.exists():
                continue
            sess = Session(id=root.name, image=imageio.load_image_png(img_path))
            scr_path = root / "scribbles.json"
            if scr_path.exists():
                raw = json.loads(scr_path.read_text())
                sess.scribbles = {int(k): set(v) for k, v in raw.items()}
            cfg_path = root / "config.json"
            if cfg_path.exists():
                raw = json.loads(cfg_path.read_text())
                sess.config = SolverConfig(theta=raw.get("theta", math.pi / 4),
                                           lam=raw.get("lambda", 2.0),
                                           neighborhood_size=raw.get("neighborhood", 8))
            sessions[sess.id] = sess

    restore()

    def get_session(session_id: str) -> Session | None:
        return sessions.get(session_id)

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        body = await request.body()
        try:
            image = imageio.load_image_png(io.BytesIO(body))
        except GridError:
            return JSONResponse({"detail": "body is not a decodable image"},
                                status_code=415)
        if image.num_pixels > max_pixels:
            return JSONResponse(
                {"detail": f"image has {image.num_pixels} pixels; "
                           f"limit is {max_pixels}"}, status_code=413)
        sess = Session(id=secrets.token_hex(8), image=image)
        sessions[sess.id] = sess
        persist(sess)
        return {"id": sess.id, "dims": list(image.dims), "channels": image.channels,
                "max_pixels": max_pixels}

    @app.get("/sessions/{session_id}")
    def session_info(session_id: str):
        sess = get_session(session_id)
        if sess is None:
            return JSONResponse({"detail": "unknown session"}, status_code=404)
        return {
            "id": sess.id,
            "dims": list(sess.image.dims),
            "status": sess.status,
            "seed_counts": {str(k): len(v) for k, v in sess.scribbles.items()},
            "has_result": sess.labeling is not None,
        }

    @app.delete("/sessions/{session_id}", status_code=204)
    def delete_session(session_id: str):
        if session_id not in sessions:
            return JSONResponse({"detail": "unknown session"}, status_code=404)
        del sessions[session_id]
        return Response(status_code=204)

    @app.post("/sessions/{session_id}/scribbles")
    def add_scribbles(session_id: str, payload: dict):
        sess = get_session(session_id)
        if sess is None:
            return JSONResponse({"detail": "unknown session"}, status_code=404)
        if not sess.lock.acquire(blocking=False):
            return JSONResponse({"detail": "segmentation in progress"},
                                status_code=409)
        try:
            strokes = payload.get("strokes", [])
            dims = sess.image.dims
            flat: list[tuple[int, int, int, int]] = []  # (label, p, r, c)
            for stroke in strokes:
                label = int(stroke["label"])
                if label < 1 or label >= len(imageio.PALETTE):
                    return JSONResponse(
                        {"detail": f"label {label} outside 1..{len(imageio.PALETTE) - 1}"},
                        status_code=422)
                for coord in stroke["pixels"]:
                    r, c = int(coord[0]), int(coord[1])
                    if not (0 <= r < dims[0] and 0 <= c < dims[1]):
                        return JSONResponse(
                            {"detail": "pixel out of bounds",
                             "pixel": [r, c]}, status_code=422)
                    flat.append((label, r * dims[1] + c, r, c))
            overrides = []
            for label, p, r, c in flat:  # stroke order: last write wins
                for other, pset in sess.scribbles.items():
                    if other != label and p in pset:
                        pset.discard(p)
                        overrides.append({"pixel": [r, c], "from": other,
                                          "to": label})
                sess.scribbles.setdefault(label, set()).add(p)
            persist(sess)
            return {"counts": {str(k): len(v) for k, v in sess.scribbles.items()},
                    "overrides": overrides}
        finally:
            sess.lock.release()

    @app.post("/sessions/{session_id}/segment")
    def run_segmentation(session_id: str, payload: dict | None = None):
        sess = get_session(session_id)
        if sess is None:
            return JSONResponse({"detail": "unknown session"}, status_code=404)
        seeded = [k for k, v in sess.scribbles.items() if v]
        if len(seeded) < 2:
            return JSONResponse(
                {"detail": "need seeds for at least two labels"}, status_code=422)
        payload = payload or {}
        try:
            cfg = SolverConfig(
                theta=float(payload.get("theta", sess.config.theta)),
                lam=float(payload.get("lambda", sess.config.lam)),
                neighborhood_size=int(payload.get("neighborhood",
                                                  sess.config.neighborhood_size)),
                gmm_components=sess.config.gmm_components,
                rng_seed=sess.config.rng_seed,
            )
        except GridError as exc:
            return JSONResponse({"detail": str(exc)}, status_code=422)
        if not sess.lock.acquire(blocking=False):
            return JSONResponse({"detail": "segmentation in progress"},
                                status_code=409)
        try:
            sess.config = cfg
            try:
                labeling, energy, _log = segment(sess.image, sess.scribble_set(), cfg)
            except OverConstrainedError as exc:
                dims = sess.image.dims
                edges = [{"label": int(k),
                          "p": [int(x) for x in np.unravel_index(p, dims)],
                          "q": [int(x) for x in np.unravel_index(q, dims)]}
                         for k, p, q in exc.violations[:64]]
                return JSONResponse({"detail": "over-constrained setup",
                                     "violated_edges": edges}, status_code=422)
            except GridError as exc:
                return JSONResponse({"detail": str(exc)}, status_code=422)
            sess.labeling = labeling
            sess.energy = energy
            persist(sess)
            return {
                "labeling": {"rle_rows": rle_encode_rows(labeling, sess.image.dims),
                             "dims": list(sess.image.dims)},
                "energy": energy.as_dict(),
                "counts": {str(k): v for k, v in labeling.counts().items()},
                "config_used": {"theta": cfg.theta, "lambda": cfg.lam,
                                "neighborhood": cfg.neighborhood_size},
            }
        finally:
            sess.lock.release()

    @app.get("/sessions/{session_id}/overlay.png")
    def overlay(session_id: str):
        sess = get_session(session_id)
        if sess is None:
            return JSONResponse({"detail": "unknown session"}, status_code=404)
        if sess.labeling is None:
            return JSONResponse({"detail": "no result yet"}, status_code=404)
        img = imageio.overlay_image(sess.image, sess.labeling)
        buf = io.BytesIO()
        img.save(buf, format="PNG")
        return Response(content=buf.getvalue(), media_type="image/png")

    return app


app = create_app()


def main() -> None:  # pragma: no cover - thin launcher
    import uvicorn

    port = int(os.environ.get("HHSEG_PORT", "8800"))
    uvicorn.run(app, host="0.0.0.0", port=port)


if __name__ == "__main__":  # pragma: no cover
    main()
