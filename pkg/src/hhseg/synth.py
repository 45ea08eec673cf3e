"""Deterministic synthetic instances: shapes, seeds, ground truth, test fields."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distance import VectorField
from .grid import GridError, GridImage, Labeling, ScribbleSet

KINDS = ("stars", "lungs", "disk", "octagon", "rotating-field")


@dataclass(frozen=True)
class SyntheticInstance:
    image: GridImage
    scribbles: ScribbleSet
    truth: Labeling
    field: VectorField | None = None
    centers: dict[int, tuple[float, float]] | None = None


def _pixel_grid(dims):
    return np.meshgrid(*[np.arange(d, dtype=np.float64) for d in dims], indexing="ij")


def _disk_indices(dims, center, radius) -> np.ndarray:
    rr, cc = _pixel_grid(dims)
    mask = (rr - center[0]) ** 2 + (cc - center[1]) ** 2 <= radius ** 2
    return np.flatnonzero(mask.reshape(-1))


def _point_in_polygon(points_r, points_c, verts) -> np.ndarray:
    """Even-odd rule, vectorized over pixel centers."""
    inside = np.zeros(points_r.shape, dtype=bool)
    nv = len(verts)
    for i in range(nv):
        r1, c1 = verts[i]
        r2, c2 = verts[(i + 1) % nv]
        crosses = ((c1 > points_c) != (c2 > points_c))
        with np.errstate(divide="ignore", invalid="ignore"):
            r_at = r1 + (points_c - c1) * (r2 - r1) / (c2 - c1)
        inside ^= crosses & (points_r < r_at)
    return inside


def _star_vertices(center, r_outer, r_inner, points=5, rotation=0.0):
    verts = []
    for i in range(points * 2):
        ang = rotation + i * math.pi / points
        rad = r_outer if i % 2 == 0 else r_inner
        verts.append((center[0] + rad * math.cos(ang), center[1] + rad * math.sin(ang)))
    return verts


def _octagon_vertices(center, radius, rotation=math.pi / 8):
    return [(center[0] + radius * math.cos(rotation + i * math.pi / 4),
             center[1] + radius * math.sin(rotation + i * math.pi / 4))
            for i in range(8)]


def _render(dims, region_masks: dict[int, np.ndarray], fg_levels: dict[int, float],
            bg_level: float, noise: float, rng) -> tuple[GridImage, Labeling]:
    img = np.full(dims, bg_level)
    assign = np.ones(int(np.prod(dims)), dtype=np.int32)
    for label, mask in region_masks.items():
        img[mask] = fg_levels[label]
        assign[mask.reshape(-1)] = label
    if noise > 0:
        img = img + rng.normal(0.0, noise, size=img.shape)
    img = np.clip(img, 0.0, 1.0)
    labels = tuple(sorted({1} | set(region_masks)))
    truth = Labeling(assignment=assign, labels=labels, background=1)
    return GridImage.from_array(img), truth


def _corner_blobs(dims, size=3) -> np.ndarray:
    """Background seeds: small squares in all four corners."""
    idx = np.arange(int(np.prod(dims))).reshape(dims)
    parts = [idx[:size, :size], idx[:size, -size:], idx[-size:, :size], idx[-size:, -size:]]
    return np.unique(np.concatenate([p.ravel() for p in parts]))


def generate_synthetic(kind: str, dims=(128, 128), noise: float = 0.05,
                       seed: int = 0, **params) -> SyntheticInstance:
    """Deterministic generator for a named instance family.

    Shape kinds require dims >= 16 per axis. Label 1 is always background;
    objects use labels 2, 3, ...; truth is exact (pre-noise) geometry.
    """
    if kind not in KINDS:
        raise GridError(f"unknown synthetic kind {kind!r}; choose from {KINDS}")
    dims = tuple(int(d) for d in dims)
    if len(dims) != 2:
        raise GridError("generators are 2D")
    rng = np.random.default_rng(seed)
    if kind != "rotating-field" and min(dims) < 16:
        raise GridError("shape kinds need dims >= 16 per axis")
    h, w = dims
    rr, cc = _pixel_grid(dims)

    if kind == "disk":
        center = (h / 2.0, w / 2.0)
        radius = params.get("radius", 0.30 * min(dims))
        mask = (rr - center[0]) ** 2 + (cc - center[1]) ** 2 <= radius ** 2
        image, truth = _render(dims, {2: mask}, {2: 0.75}, 0.25, noise, rng)
        cpix = (int(round(center[0])), int(round(center[1])))
        scr = ScribbleSet.from_dict({
            2: [cpix[0] * w + cpix[1]],
            1: _corner_blobs(dims),
        })
        return SyntheticInstance(image, scr, truth, centers={2: center})

    if kind == "octagon":
        center = (h / 2.0, w / 2.0)
        radius = params.get("radius", 0.35 * min(dims))
        verts = _octagon_vertices(center, radius)
        mask = _point_in_polygon(rr, cc, verts)
        image, truth = _render(dims, {2: mask}, {2: 0.75}, 0.25, noise, rng)
        ring = _octagon_vertices(center, radius / 2.0)
        seeds = set()
        for i in range(len(ring)):
            r1, c1 = ring[i]
            r2, c2 = ring[(i + 1) % len(ring)]
            steps = int(max(abs(r2 - r1), abs(c2 - c1))) * 2 + 1
            for t in np.linspace(0.0, 1.0, steps):
                r = int(round(r1 + t * (r2 - r1)))
                c = int(round(c1 + t * (c2 - c1)))
                seeds.add(r * w + c)
        scr = ScribbleSet.from_dict({2: sorted(seeds), 1: _corner_blobs(dims)})
        return SyntheticInstance(image, scr, truth, centers={2: center})

    if kind == "stars":
        r_star = params.get("radius", 0.21 * min(dims))
        spread = params.get("color_spread", 0.02)
        centers = {
            2: (0.30 * h, 0.28 * w),
            3: (0.32 * h, 0.72 * w),
            4: (0.72 * h, 0.50 * w),
        }
        rotations = {2: 0.3, 3: 1.2, 4: 2.1}
        masks, levels = {}, {}
        for i, (label, ctr) in enumerate(centers.items()):
            verts = _star_vertices(ctr, r_star, 0.45 * r_star, rotation=rotations[label])
            masks[label] = _point_in_polygon(rr, cc, verts)
            levels[label] = 0.72 + spread * i  # nearly identical foreground colors
        image, truth = _render(dims, masks, levels, 0.25, noise, rng)
        scrib: dict[int, np.ndarray] = {1: _corner_blobs(dims)}
        for label, ctr in centers.items():
            scrib[label] = _disk_indices(dims, ctr, 2.2)
        scr = ScribbleSet.from_dict(scrib)
        return SyntheticInstance(image, scr, truth, centers=centers)

    if kind == "lungs":
        cl = (0.52 * h, 0.30 * w)
        cr = (0.52 * h, 0.68 * w)
        a, b = 0.30 * h, 0.14 * w
        left = ((rr - cl[0]) / a) ** 2 + ((cc - cl[1]) / b) ** 2 <= 1.0
        # right lung: ellipse with a bite taken out, deliberately not star-shaped
        right = ((rr - cr[0]) / a) ** 2 + ((cc - cr[1]) / b) ** 2 <= 1.0
        bite = ((rr - (cr[0] + 0.1 * h)) / (0.22 * h)) ** 2 \
            + ((cc - (cr[1] - 0.12 * w)) / (0.10 * w)) ** 2 <= 1.0
        right &= ~bite
        image, truth = _render(dims, {2: left, 3: right}, {2: 0.70, 3: 0.74},
                               0.25, noise, rng)
        idx = np.arange(h * w).reshape(dims)
        lseed = idx[int(cl[0]) - 4: int(cl[0]) + 5, int(cl[1])].ravel()
        rseed = idx[int(cr[0]) - 4: int(cr[0]) + 5, int(cr[1]) + 2].ravel()
        scr = ScribbleSet.from_dict({2: lseed, 3: rseed, 1: _corner_blobs(dims)})
        return SyntheticInstance(image, scr, truth, centers={2: cl, 3: cr})

    # rotating-field: orientation turns 90 degrees between adjacent columns
    angles = cc * (math.pi / 2.0)
    vectors = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    field = VectorField(dims=dims, vectors=vectors,
                        defined=np.ones(dims, dtype=bool))
    mask = cc < w / 2.0
    image, truth = _render(dims, {2: mask}, {2: 0.75}, 0.25, noise, rng)
    scr = ScribbleSet.from_dict({2: [0], 1: [h * w - 1]})
    return SyntheticInstance(image, scr, truth, field=field)
