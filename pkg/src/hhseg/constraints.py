"""Directed infinity-edge sets realizing cone-constrained surface normals.

A label's shape prior restricts segment boundary normals to a cone of
half-angle theta around a per-pixel unit vector field. The prior is enforced
without ever computing normals: a directed neighborhood edge p->q gets
infinite cut cost whenever its direction lies in the polar cone of the
allowed-normal cone at p (or the mirrored cone at q). Any finite-cost
segmentation then satisfies the normal constraint.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .distance import VectorField
from .grid import GridError, NeighborhoodSystem, Labeling, offset_pairs, pixel_coords

TAG_CONE = 0
TAG_FIX = 1
_TAG_NAMES = {TAG_CONE: "cone", TAG_FIX: "empty-cone-fix"}


@dataclass(frozen=True)
class ConeParams:
    """Cone half-angle in [0, pi/2] and its dot-product threshold cos(theta)."""

    theta: float
    tau_equivalent: float

    def __post_init__(self):
        if not (0.0 <= self.theta <= math.pi / 2):
            raise GridError(f"theta must be in [0, pi/2], got {self.theta}")
        if abs(self.tau_equivalent - math.cos(self.theta)) > 1e-12:
            raise GridError("tau_equivalent inconsistent with theta")

    @classmethod
    def from_theta(cls, theta: float) -> "ConeParams":
        return cls(theta=float(theta), tau_equivalent=math.cos(theta))


@dataclass(frozen=True)
class ConstraintEdgeSet:
    """Directed infinity edges for one label, canonically ordered by (p, q)."""

    dims: tuple[int, ...]
    edges: np.ndarray        # (M, 2) int64 flat pixel indices, directed p->q
    tags: np.ndarray         # (M,) uint8, TAG_CONE or TAG_FIX
    offset_index: np.ndarray  # (M,) int64 index into the neighborhood's offsets
    pruned: bool = False
    cone_fixed: bool = False

    @property
    def num_edges(self) -> int:
        return self.edges.shape[0]


def polar_cone_contains(v_hat, e_hat, theta: float) -> bool:
    """True iff direction e_hat lies in the polar cone of the width-theta cone
    around v_hat, i.e. <e_hat, v_hat> <= -sin(theta); the boundary is inclusive."""
    v = np.asarray(v_hat, dtype=np.float64)
    e = np.asarray(e_hat, dtype=np.float64)
    if abs(np.linalg.norm(v) - 1.0) > 1e-6 or abs(np.linalg.norm(e) - 1.0) > 1e-6:
        raise GridError("polar_cone_contains expects unit vectors")
    if not (0.0 <= theta <= math.pi / 2):
        raise GridError(f"theta must be in [0, pi/2], got {theta}")
    return bool(np.dot(e, v) <= -math.sin(theta))


def _canonical_order(edges: np.ndarray, tags: np.ndarray, oidx: np.ndarray):
    order = np.lexsort((edges[:, 1], edges[:, 0]))
    return edges[order], tags[order], oidx[order]


def build_constraint_edges(field: VectorField, nbhd: NeighborhoodSystem,
                           theta: float) -> ConstraintEdgeSet:
    """Directed edge p->q is included iff the unit step direction e lies in the
    polar cone at p (<e, v_p> <= -sin theta) or the mirrored cone at q
    (<e, v_q> <= -sin theta); pixels with undefined vectors contribute nothing."""
    if len(field.dims) != nbhd.dim:
        raise GridError(f"field dims {field.dims} do not match neighborhood dim {nbhd.dim}")
    if not (0.0 <= theta <= math.pi / 2):
        raise GridError(f"theta must be in [0, pi/2], got {theta}")
    thresh = -math.sin(theta)
    vecs = field.flat_vectors()
    defined = field.flat_defined()
    units = nbhd.unit_offsets()
    all_p, all_q, all_o = [], [], []
    for k in range(nbhd.size):
        p_idx, q_idx = offset_pairs(field.dims, nbhd.offsets[k])
        e_hat = units[k]
        dot_p = vecs[p_idx] @ e_hat
        dot_q = vecs[q_idx] @ e_hat
        keep = (defined[p_idx] & (dot_p <= thresh)) | (defined[q_idx] & (dot_q <= thresh))
        all_p.append(p_idx[keep])
        all_q.append(q_idx[keep])
        all_o.append(np.full(int(keep.sum()), k, dtype=np.int64))
    edges = np.stack([np.concatenate(all_p), np.concatenate(all_q)], axis=1) \
        if all_p else np.empty((0, 2), dtype=np.int64)
    tags = np.zeros(edges.shape[0], dtype=np.uint8)
    oidx = np.concatenate(all_o) if all_o else np.empty(0, dtype=np.int64)
    edges, tags, oidx = _canonical_order(edges, tags, oidx)
    return ConstraintEdgeSet(dims=field.dims, edges=edges, tags=tags, offset_index=oidx)


def prune_conflicting_edges(edge_set: ConstraintEdgeSet, field: VectorField,
                            nbhd: NeighborhoodSystem, theta: float) -> ConstraintEdgeSet:
    """Drop edges inconsistent with the interpolated field between their endpoints.

    For an edge p->q with both vectors defined, the interpolated orientation is
    the normalized sum v_p + v_q; the edge survives only if the step direction
    still lies in that orientation's polar cone. Near-opposite endpoint vectors
    (norm of the sum < 1e-9) define no orientation, so the edge is kept, as are
    edges with only one defined endpoint.
    """
    thresh = -math.sin(theta)
    vecs = field.flat_vectors()
    defined = field.flat_defined()
    p = edge_set.edges[:, 0]
    q = edge_set.edges[:, 1]
    both = defined[p] & defined[q]
    vsum = vecs[p] + vecs[q]
    norms = np.sqrt((vsum * vsum).sum(axis=1))
    keep = np.ones(edge_set.num_edges, dtype=bool)
    # only cone-tagged edges are prunable; repair edges always survive
    testable = both & (norms >= 1e-9) & (edge_set.tags == TAG_CONE)
    if testable.any():
        units = nbhd.unit_offsets()
        e_hat = units[edge_set.offset_index[testable]]
        v_mid = vsum[testable] / norms[testable, None]
        keep[testable] = (v_mid * e_hat).sum(axis=1) <= thresh
    return replace(edge_set, edges=edge_set.edges[keep], tags=edge_set.tags[keep],
                   offset_index=edge_set.offset_index[keep], pruned=True)


def apply_empty_cone_fix(edge_set: ConstraintEdgeSet, field: VectorField,
                         nbhd: NeighborhoodSystem, theta: float) -> ConstraintEdgeSet:
    """Give every defined pixel whose polar cone captured no outgoing edge one
    constraint edge toward its most antiparallel neighbor.

    A pixel p qualifies when no remaining outgoing edge p->q satisfies the
    polar-cone test against v_p itself (edges present only via the q-side
    clause do not count). The added edge minimizes <unit offset, v_p>, ties
    broken by lexicographic offset order; skipped if the target is out of
    bounds or the edge already exists.
    """
    thresh = -math.sin(theta)
    n = int(np.prod(field.dims))
    vecs = field.flat_vectors()
    defined = field.flat_defined()
    units = nbhd.unit_offsets()

    has_own = np.zeros(n, dtype=bool)
    if edge_set.num_edges:
        p = edge_set.edges[:, 0]
        e_hat = units[edge_set.offset_index]
        own = defined[p] & ((vecs[p] * e_hat).sum(axis=1) <= thresh)
        np.logical_or.at(has_own, p[own], True)

    todo = np.flatnonzero(defined & ~has_own)
    if todo.size == 0:
        return replace(edge_set, cone_fixed=True)

    dots = vecs[todo] @ units.T  # (T, K)
    # among offsets attaining the minimum dot, take the lexicographically smallest
    lex_order = np.lexsort(tuple(nbhd.offsets[:, c] for c in reversed(range(nbhd.dim))))
    rank_of = np.empty(nbhd.size, dtype=np.int64)
    rank_of[lex_order] = np.arange(nbhd.size)
    is_min = dots == dots.min(axis=1, keepdims=True)
    choice = np.argmin(np.where(is_min, rank_of[None, :], np.iinfo(np.int64).max), axis=1)

    coords = np.stack(np.unravel_index(todo, field.dims), axis=1)
    targets = coords + nbhd.offsets[choice]
    inb = np.ones(todo.size, dtype=bool)
    for a, d in enumerate(field.dims):
        inb &= (targets[:, a] >= 0) & (targets[:, a] < d)
    todo, choice, targets = todo[inb], choice[inb], targets[inb]
    q = np.ravel_multi_index(tuple(targets.T), field.dims)

    existing = set(map(tuple, edge_set.edges.tolist()))
    keep = np.array([(int(a), int(b)) not in existing for a, b in zip(todo, q)],
                    dtype=bool) if todo.size else np.empty(0, dtype=bool)
    todo, choice, q = todo[keep], choice[keep], q[keep]

    edges = np.concatenate([edge_set.edges, np.stack([todo, q], axis=1)], axis=0)
    tags = np.concatenate([edge_set.tags, np.full(todo.size, TAG_FIX, dtype=np.uint8)])
    oidx = np.concatenate([edge_set.offset_index, choice])
    edges, tags, oidx = _canonical_order(edges, tags, oidx)
    return replace(edge_set, edges=edges, tags=tags, offset_index=oidx, cone_fixed=True)


def check_feasibility(labeling: Labeling,
                      constraints: dict[int, ConstraintEdgeSet]) -> list[tuple[int, int, int]]:
    """Every violated edge (label k, p, q) with f_p = k and f_q != k; empty means
    the labeling satisfies all shape constraints."""
    out: list[tuple[int, int, int]] = []
    f = labeling.assignment
    for k, es in constraints.items():
        if es.num_edges == 0:
            continue
        p = es.edges[:, 0]
        q = es.edges[:, 1]
        bad = (f[p] == k) & (f[q] != k)
        for i in np.flatnonzero(bad):
            out.append((k, int(p[i]), int(q[i])))
    return out


def dump_edges(edge_set: ConstraintEdgeSet) -> str:
    """Line-oriented text dump 'p_coords -> q_coords tag' for golden tests."""
    lines = []
    for (p, q), tag in zip(edge_set.edges.tolist(), edge_set.tags.tolist()):
        pc = pixel_coords(p, edge_set.dims)
        qc = pixel_coords(q, edge_set.dims)
        lines.append(f"{pc} -> {qc} {_TAG_NAMES[int(tag)]}")
    return "\n".join(lines)
