"""Pixel lattice, neighborhood systems, labelings, and scribble bookkeeping."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class GridImage:
    """A 2D or 3D intensity grid with values in [0, 1], channels last."""

    dims: tuple[int, ...]
    channels: int
    data: np.ndarray  # shape (*dims, channels), float64

    def __post_init__(self):
        if len(self.dims) not in (2, 3):
            raise GridError(f"dims must be 2D or 3D, got {self.dims}")
        if any(d <= 0 for d in self.dims):
            raise GridError(f"dims must be positive, got {self.dims}")
        if self.channels <= 0:
            raise GridError("channels must be positive")
        expected = (*self.dims, self.channels)
        if self.data.shape != expected:
            raise GridError(f"data shape {self.data.shape} != {expected}")

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "GridImage":
        """Wrap an array shaped (*dims,) or (*dims, channels); values clipped to [0,1]."""
        a = np.asarray(arr, dtype=np.float64)
        if a.ndim in (2, 3) and (a.ndim == 2 or a.shape[-1] > 4):
            # no channel axis present
            a = a[..., None]
        dims = a.shape[:-1]
        a = np.clip(a, 0.0, 1.0)
        return cls(dims=tuple(int(d) for d in dims), channels=int(a.shape[-1]), data=a)

    @property
    def num_pixels(self) -> int:
        return int(np.prod(self.dims))

    def flat(self) -> np.ndarray:
        """(num_pixels, channels) row-major view of the intensities."""
        return self.data.reshape(self.num_pixels, self.channels)


@dataclass(frozen=True)
class NeighborhoodSystem:
    """Signed integer offsets defining pixel adjacency, closed under negation."""

    dim: int
    offsets: np.ndarray  # (K, dim) int64, canonical order
    lengths: np.ndarray  # (K,) Euclidean lengths

    @property
    def size(self) -> int:
        return self.offsets.shape[0]

    def unit_offsets(self) -> np.ndarray:
        return self.offsets / self.lengths[:, None]

    def positive_half(self) -> np.ndarray:
        """Indices of the lexicographically-positive offset of each ± pair."""
        keep = []
        for i, o in enumerate(self.offsets):
            for c in o:
                if c > 0:
                    keep.append(i)
                    break
                if c < 0:
                    break
        return np.asarray(keep, dtype=np.int64)


def _coprime(vec) -> bool:
    g = 0
    for c in vec:
        g = math.gcd(g, abs(int(c)))
    return g == 1


def build_neighborhood(dim: int, size: int) -> NeighborhoodSystem:
    """Canonical neighborhood: 2D sizes 4/8/16/32, 3D sizes 6/26.

    2D systems are the `size` shortest coprime integer offsets ordered by
    (length, angle); each supported size closes a full length shell, so the
    result is negation-closed.
    """
    if dim == 2 and size in (4, 8, 16, 32):
        cands = []
        r = 4
        for a in range(-r, r + 1):
            for b in range(-r, r + 1):
                if (a, b) == (0, 0) or not _coprime((a, b)):
                    continue
                ang = math.atan2(b, a) % (2 * math.pi)
                cands.append((math.hypot(a, b), ang, (a, b)))
        cands.sort()
        offsets = np.array([c[2] for c in cands[:size]], dtype=np.int64)
    elif dim == 3 and size == 6:
        offsets = np.array(
            [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)],
            dtype=np.int64,
        )
    elif dim == 3 and size == 26:
        offs = [
            (a, b, c)
            for a in (-1, 0, 1)
            for b in (-1, 0, 1)
            for c in (-1, 0, 1)
            if (a, b, c) != (0, 0, 0)
        ]
        offs.sort(key=lambda o: (math.sqrt(o[0] ** 2 + o[1] ** 2 + o[2] ** 2), o))
        offsets = np.array(offs, dtype=np.int64)
    else:
        raise GridError(f"unsupported neighborhood (dim={dim}, size={size})")
    lengths = np.sqrt((offsets.astype(np.float64) ** 2).sum(axis=1))
    return NeighborhoodSystem(dim=dim, offsets=offsets, lengths=lengths)


def pixel_index(coords, dims) -> int:
    """Row-major flat index (last coordinate fastest)."""
    if len(coords) != len(dims):
        raise GridError(f"coords {coords} do not match dims {dims}")
    for c, d in zip(coords, dims):
        if not (0 <= c < d):
            raise GridError(f"coords {coords} out of range for dims {dims}")
    idx = 0
    for c, d in zip(coords, dims):
        idx = idx * d + int(c)
    return idx


def pixel_coords(index: int, dims) -> tuple[int, ...]:
    n = int(np.prod(dims))
    if not (0 <= index < n):
        raise GridError(f"index {index} out of range for dims {dims}")
    coords = []
    for d in reversed(dims):
        coords.append(index % d)
        index //= d
    return tuple(reversed(coords))


def offset_pairs(dims, offset) -> tuple[np.ndarray, np.ndarray]:
    """All in-bounds directed pairs (p, p+offset) as flat index arrays."""
    idx = np.arange(int(np.prod(dims)), dtype=np.int64).reshape(dims)
    src_sl, dst_sl = [], []
    for o, d in zip(offset, dims):
        o = int(o)
        src_sl.append(slice(max(0, -o), d - max(0, o)))
        dst_sl.append(slice(max(0, o), d - max(0, -o)))
    return idx[tuple(src_sl)].ravel(), idx[tuple(dst_sl)].ravel()


@dataclass(frozen=True)
class Labeling:
    """Per-pixel label assignment over an ordered label set with a background label."""

    assignment: np.ndarray  # (num_pixels,) int32
    labels: tuple[int, ...]
    background: int

    def __post_init__(self):
        if self.background not in self.labels:
            raise GridError(f"background {self.background} not in labels {self.labels}")
        if not np.isin(self.assignment, np.asarray(self.labels)).all():
            bad = set(np.unique(self.assignment)) - set(self.labels)
            raise GridError(f"assignment contains labels outside {self.labels}: {bad}")

    def with_assignment(self, assignment: np.ndarray) -> "Labeling":
        return Labeling(assignment=assignment.astype(np.int32), labels=self.labels,
                        background=self.background)

    def mask(self, label: int) -> np.ndarray:
        return self.assignment == label

    def counts(self) -> dict[int, int]:
        return {int(k): int((self.assignment == k).sum()) for k in self.labels}


@dataclass(frozen=True)
class ScribbleSet:
    """Per-label seed pixel sets (flat indices, sorted and unique)."""

    seeds: dict[int, np.ndarray] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict[int, "np.ndarray | list[int]"]) -> "ScribbleSet":
        return cls({int(k): np.unique(np.asarray(v, dtype=np.int64)) for k, v in d.items()})

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(sorted(self.seeds))

    def pixels(self, label: int) -> np.ndarray:
        return self.seeds.get(label, np.empty(0, dtype=np.int64))

    def all_pixels(self) -> np.ndarray:
        if not self.seeds:
            return np.empty(0, dtype=np.int64)
        return np.concatenate([v for v in self.seeds.values()])


def validate_scribbles(scribbles: ScribbleSet, image: GridImage,
                       background: int | None = None) -> list[dict]:
    """Report overlaps, out-of-bounds seeds, and empty non-background labels.

    Returns a list of structured error dicts; never raises.
    """
    errors: list[dict] = []
    n = image.num_pixels
    owner: dict[int, int] = {}
    for label in sorted(scribbles.seeds):
        px = scribbles.seeds[label]
        if px.size == 0 and label != background:
            errors.append({"kind": "missing-seed", "label": label})
            continue
        for p in px.tolist():
            if not (0 <= p < n):
                errors.append({"kind": "out-of-bounds", "label": label, "pixel": p})
            elif p in owner:
                errors.append({"kind": "overlap", "pixel": p,
                               "labels": [owner[p], label]})
            else:
                owner[p] = label
    return errors
