"""PNG and raw-volume I/O plus the label palette shared with the browser UI."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from .grid import GridError, GridImage, Labeling, ScribbleSet

# Palette index = label id; index 0 is reserved for "unlabeled" in scribble
# images. The browser client keeps an identical copy.
PALETTE: list[tuple[int, int, int]] = [
    (0, 0, 0),        # 0 unlabeled
    (64, 64, 64),     # 1 background
    (228, 26, 28),    # 2
    (55, 126, 184),   # 3
    (77, 175, 74),    # 4
    (152, 78, 163),   # 5
    (255, 127, 0),    # 6
    (255, 255, 51),   # 7
    (166, 86, 40),    # 8
    (247, 129, 191),  # 9
    (0, 206, 209),    # 10
    (154, 205, 50),   # 11
    (255, 0, 255),    # 12
    (30, 144, 255),   # 13
    (210, 105, 30),   # 14
    (128, 128, 0),    # 15
]

OVERLAY_ALPHA = 0.5


def _flat_palette() -> list[int]:
    flat: list[int] = []
    for rgb in PALETTE:
        flat.extend(rgb)
    flat.extend([0] * (768 - len(flat)))
    return flat


def load_image_png(path) -> GridImage:
    """Decode a PNG into a [0,1]-normalized grid; alpha channels are dropped."""
    try:
        img = Image.open(path)
        img.load()
    except Exception as exc:
        raise GridError(f"cannot decode image {path}: {exc}") from exc
    if img.mode in ("RGBA", "P", "CMYK"):
        img = img.convert("RGB")
    elif img.mode in ("LA", "I;16", "I", "F"):
        img = img.convert("L")
    arr = np.asarray(img, dtype=np.float64) / 255.0
    return GridImage.from_array(arr)


def save_image_png(image: GridImage, path) -> None:
    arr = np.clip(image.data * 255.0, 0, 255).astype(np.uint8)
    if image.channels == 1:
        Image.fromarray(arr[..., 0], mode="L").save(path)
    else:
        Image.fromarray(arr, mode="RGB").save(path)


def save_labeling_png(labeling: Labeling, dims, path) -> None:
    """Indexed PNG whose palette index is the label id; round-trips exactly."""
    arr = labeling.assignment.reshape(dims).astype(np.uint8)
    img = Image.fromarray(arr, mode="P")
    img.putpalette(_flat_palette())
    img.save(path)


def load_labeling_png(path, background: int = 1) -> Labeling:
    img = Image.open(path)
    if img.mode != "P":
        raise GridError(f"{path} is not an indexed label image")
    arr = np.asarray(img, dtype=np.int32)
    labels = tuple(sorted(set(np.unique(arr).tolist()) | {background}))
    return Labeling(assignment=arr.reshape(-1), labels=labels, background=background)


def save_scribbles_png(scribbles: ScribbleSet, dims, path) -> None:
    arr = np.zeros(int(np.prod(dims)), dtype=np.uint8)
    for label in scribbles.labels:
        arr[scribbles.pixels(label)] = label
    img = Image.fromarray(arr.reshape(dims), mode="P")
    img.putpalette(_flat_palette())
    img.save(path)


def load_scribbles_png(path) -> ScribbleSet:
    """Palette index = label id; index 0 means unlabeled."""
    img = Image.open(path)
    if img.mode != "P":
        raise GridError(f"{path} is not an indexed scribble image")
    arr = np.asarray(img, dtype=np.int64).reshape(-1)
    return ScribbleSet.from_dict({int(k): np.flatnonzero(arr == k)
                                  for k in np.unique(arr) if k != 0})


def overlay_image(image: GridImage, labeling: Labeling,
                  alpha: float = OVERLAY_ALPHA) -> Image.Image:
    """Image blended with per-label palette colors at a fixed alpha."""
    if len(image.dims) != 2:
        raise GridError("overlays are 2D only")
    base = image.data
    if image.channels == 1:
        base = np.repeat(base, 3, axis=-1)
    colors = np.asarray(PALETTE, dtype=np.float64) / 255.0
    lab = labeling.assignment.reshape(image.dims) % len(PALETTE)
    tint = colors[lab]
    out = (1.0 - alpha) * base + alpha * tint
    return Image.fromarray(np.clip(out * 255.0, 0, 255).astype(np.uint8), mode="RGB")


def save_volume(image: GridImage, json_path) -> None:
    """3D volume as raw float32 plus a JSON header next to it."""
    json_path = Path(json_path)
    raw_name = json_path.with_suffix(".raw").name
    header = {"dims": list(image.dims), "channels": image.channels,
              "dtype": "float32", "raw": raw_name}
    (json_path.parent / raw_name).write_bytes(
        image.data.astype("<f4").tobytes(order="C"))
    json_path.write_text(json.dumps(header))


def load_volume(json_path) -> GridImage:
    json_path = Path(json_path)
    try:
        header = json.loads(json_path.read_text())
        dims = tuple(int(d) for d in header["dims"])
        channels = int(header["channels"])
        raw = (json_path.parent / header["raw"]).read_bytes()
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        raise GridError(f"cannot load volume {json_path}: {exc}") from exc
    if header.get("dtype", "float32") != "float32":
        raise GridError("volume dtype must be float32")
    arr = np.frombuffer(raw, dtype="<f4").astype(np.float64)
    expected = int(np.prod(dims)) * channels
    if arr.size != expected:
        raise GridError(f"volume raw size {arr.size} != expected {expected}")
    return GridImage(dims=dims, channels=channels,
                     data=arr.reshape(*dims, channels))


def load_label_volume(json_path, background: int = 1) -> Labeling:
    """3D labels as raw uint8 plus a JSON header ({"dims": ..., "raw": ...})."""
    json_path = Path(json_path)
    header = json.loads(json_path.read_text())
    dims = tuple(int(d) for d in header["dims"])
    raw = (json_path.parent / header["raw"]).read_bytes()
    arr = np.frombuffer(raw, dtype=np.uint8).astype(np.int32)
    if arr.size != int(np.prod(dims)):
        raise GridError("label volume size mismatch")
    labels = tuple(sorted(set(np.unique(arr).tolist()) | {background}))
    return Labeling(assignment=arr, labels=labels, background=background)
