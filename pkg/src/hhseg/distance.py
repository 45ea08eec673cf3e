"""Distance maps from seed sets or region outlines, and their gradient fields."""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .grid import GridError

_INF = np.inf


@dataclass(frozen=True)
class DistanceMap:
    dims: tuple[int, ...]
    values: np.ndarray  # shape dims, float64


@dataclass(frozen=True)
class VectorField:
    """Per-pixel unit direction; pixels may be undefined (flagged False)."""

    dims: tuple[int, ...]
    vectors: np.ndarray  # (*dims, dim) float64, zeros where undefined
    defined: np.ndarray  # shape dims, bool

    @property
    def dim(self) -> int:
        return len(self.dims)

    def flat_vectors(self) -> np.ndarray:
        return self.vectors.reshape(-1, self.dim)

    def flat_defined(self) -> np.ndarray:
        return self.defined.reshape(-1)


def _edt_1d_sq(f: np.ndarray) -> np.ndarray:
    """Lower envelope of parabolas: out[i] = min_j (i-j)^2 + f[j]."""
    n = f.shape[0]
    out = np.empty(n)
    v = np.zeros(n, dtype=np.int64)
    z = np.empty(n + 1)
    k = -1
    for q in range(n):
        fq = f[q]
        if fq == _INF:
            continue
        while k >= 0:
            p = v[k]
            s = ((fq + q * q) - (f[p] + p * p)) / (2.0 * (q - p))
            if s <= z[k]:
                k -= 1
            else:
                break
        if k < 0:
            k = 0
            v[0] = q
            z[0] = -_INF
        else:
            k += 1
            v[k] = q
            z[k] = s
        z[k + 1] = _INF
    if k < 0:
        return np.full(n, _INF)
    j = 0
    for q in range(n):
        while z[j + 1] < q:
            j += 1
        p = v[j]
        out[q] = (q - p) * (q - p) + f[p]
    return out


def _edt_sq(source_mask: np.ndarray) -> np.ndarray:
    g = np.where(source_mask, 0.0, _INF)
    for axis in range(g.ndim):
        moved = np.moveaxis(g, axis, -1)
        lines = moved.reshape(-1, moved.shape[-1])
        for i in range(lines.shape[0]):
            lines[i] = _edt_1d_sq(lines[i])
        g = np.moveaxis(lines.reshape(moved.shape), -1, axis)
    return g


def euclidean_distance_transform(source, dims) -> DistanceMap:
    """Exact Euclidean distance to the nearest source pixel.

    `source` is a set/array of flat pixel indices or a boolean mask of shape dims.
    """
    dims = tuple(int(d) for d in dims)
    mask = np.zeros(dims, dtype=bool)
    if isinstance(source, np.ndarray) and source.dtype == bool:
        if source.shape != mask.shape:
            raise GridError(f"source mask shape {source.shape} != dims {dims}")
        mask = source
    else:
        idx = np.asarray(sorted(source), dtype=np.int64)
        n = int(np.prod(dims))
        if idx.size and (idx.min() < 0 or idx.max() >= n):
            raise GridError("source indices out of bounds")
        mask.reshape(-1)[idx] = True
    if not mask.any():
        raise GridError("source must be non-empty")
    return DistanceMap(dims=dims, values=np.sqrt(_edt_sq(mask)))


def signed_distance(region_mask: np.ndarray, dims) -> DistanceMap:
    """Distance to the region boundary, negative inside the region.

    The boundary is the set of pixels (on either side) with an axis neighbor
    across the region edge, so complementing the mask exactly negates the map.
    """
    dims = tuple(int(d) for d in dims)
    mask = np.asarray(region_mask, dtype=bool).reshape(dims)
    if not mask.any() or mask.all():
        raise GridError("region must be non-empty and not cover the whole grid")
    boundary = np.zeros(dims, dtype=bool)
    for axis in range(len(dims)):
        lo = [slice(None)] * len(dims)
        hi = [slice(None)] * len(dims)
        lo[axis] = slice(0, -1)
        hi[axis] = slice(1, None)
        diff = mask[tuple(lo)] != mask[tuple(hi)]
        boundary[tuple(lo)] |= diff
        boundary[tuple(hi)] |= diff
    d = np.sqrt(_edt_sq(boundary))
    d[mask] = -d[mask]
    return DistanceMap(dims=dims, values=d)


def gradient_field(d: DistanceMap, eps: float = 1e-6) -> VectorField:
    """Normalized gradient of a distance map; undefined where the raw norm < eps.

    Central differences in the interior, one-sided at borders.
    """
    if eps <= 0:
        raise GridError("eps must be positive")
    vals = d.values
    grads = []
    for axis in range(vals.ndim):
        if vals.shape[axis] > 1:
            grads.append(np.gradient(vals, axis=axis))
        else:
            grads.append(np.zeros_like(vals))
    g = np.stack(grads, axis=-1)
    norm = np.sqrt((g * g).sum(axis=-1))
    defined = norm >= eps
    vectors = np.zeros_like(g)
    np.divide(g, norm[..., None], out=vectors, where=defined[..., None])
    return VectorField(dims=d.dims, vectors=vectors, defined=defined)


def radial_field(dims, center) -> VectorField:
    """Unit field pointing away from `center` (fractional coordinates allowed)."""
    dims = tuple(int(d) for d in dims)
    axes = np.meshgrid(*[np.arange(d, dtype=np.float64) for d in dims], indexing="ij")
    g = np.stack([a - c for a, c in zip(axes, center)], axis=-1)
    norm = np.sqrt((g * g).sum(axis=-1))
    defined = norm >= 1e-12
    vectors = np.zeros_like(g)
    np.divide(g, norm[..., None], out=vectors, where=defined[..., None])
    return VectorField(dims=dims, vectors=vectors, defined=defined)


_MAGIC = b"HHVF"


def save_vector_field(field: VectorField, path) -> None:
    """Binary field file: magic, u32 dim, u32 extents, float32 components.

    Little-endian, row-major; undefined pixels stored as zero vectors.
    """
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(field.dims)))
        for d in field.dims:
            fh.write(struct.pack("<I", d))
        comp = field.vectors.astype("<f4")
        comp = comp * field.defined[..., None]
        fh.write(comp.tobytes(order="C"))


def load_vector_field(path) -> VectorField:
    """Read a field file; vectors are re-normalized, zero vectors become undefined."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise GridError(f"not a vector-field file (magic {magic!r})")
        (dim,) = struct.unpack("<I", fh.read(4))
        if dim not in (2, 3):
            raise GridError(f"unsupported field dim {dim}")
        dims = tuple(struct.unpack("<I", fh.read(4))[0] for _ in range(dim))
        n = int(np.prod(dims)) * dim
        raw = fh.read(n * 4)
        if len(raw) != n * 4:
            raise GridError("truncated vector-field file")
    g = np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape(*dims, dim)
    norm = np.sqrt((g * g).sum(axis=-1))
    defined = norm > 0.0
    vectors = np.zeros_like(g)
    np.divide(g, norm[..., None], out=vectors, where=defined[..., None])
    return VectorField(dims=dims, vectors=vectors, defined=defined)
