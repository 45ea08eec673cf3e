"""Independent oracles shared by the test modules.

Everything here is deliberately written as plain loops (or exhaustive
enumeration) so it exercises none of the code paths it checks.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

INF = float("inf")


def brute_force_edt(source_coords, dims) -> np.ndarray:
    """Nearest-source Euclidean distance by direct minimization."""
    out = np.empty(dims)
    for p in itertools.product(*[range(d) for d in dims]):
        best = INF
        for s in source_coords:
            dist = math.sqrt(sum((a - b) ** 2 for a, b in zip(p, s)))
            best = min(best, dist)
        out[p] = best
    return out


def brute_force_min_cut(n, src_caps, snk_caps, arcs) -> float:
    """Minimum cut over all 2^n partitions; arcs are (p, q, cap_pq, cap_qp)."""
    best = INF
    for bits in range(1 << n):
        side = [(bits >> i) & 1 == 0 for i in range(n)]  # True = source side
        total = 0.0
        for i in range(n):
            if side[i]:
                total += snk_caps[i]
            else:
                total += src_caps[i]
        for p, q, cpq, cqp in arcs:
            if side[p] and not side[q]:
                total += cpq
            if side[q] and not side[p]:
                total += cqp
        best = min(best, total)
    return best


def naive_energy(assignment, data_values, labels, pairs, pair_weights, lam,
                 constraint_edges) -> float:
    """Straight-loop energy: data + Potts smoothness + infinite shape terms.

    `data_values` is (num_pixels, num_labels) in `labels` order, `pairs` a list
    of (p, q), `constraint_edges` a dict label -> iterable of (p, q).
    """
    col = {lab: j for j, lab in enumerate(labels)}
    total = 0.0
    for p, lab in enumerate(assignment):
        total += data_values[p][col[int(lab)]]
    for (p, q), w in zip(pairs, pair_weights):
        if assignment[p] != assignment[q]:
            total += lam * w
    for k, edges in constraint_edges.items():
        for p, q in edges:
            if assignment[p] == k and assignment[q] != k:
                return INF
    return total


def feasible_segments(edges, n) -> list[int]:
    """All bitmask segments closed under the directed edge relation."""
    masks = np.arange(1 << n, dtype=np.int64)
    ok = np.ones(masks.size, dtype=bool)
    for p, q in edges:
        inside_p = (masks >> int(p)) & 1 == 1
        inside_q = (masks >> int(q)) & 1 == 1
        ok &= ~(inside_p & ~inside_q)
    return np.flatnonzero(ok).tolist()


def cone_direction_samples(v, theta, steps=40) -> np.ndarray:
    """Dense directions inside the width-theta cone around unit vector v."""
    v = np.asarray(v, dtype=np.float64)
    if v.size == 2:
        base = math.atan2(v[1], v[0])
        angs = base + np.linspace(-theta, theta, 2 * steps + 1)
        return np.stack([np.cos(angs), np.sin(angs)], axis=1)
    # 3D: spherical cap around v
    if abs(v[0]) < 0.9:
        u1 = np.cross(v, [1.0, 0.0, 0.0])
    else:
        u1 = np.cross(v, [0.0, 1.0, 0.0])
    u1 /= np.linalg.norm(u1)
    u2 = np.cross(v, u1)
    phi = np.linspace(0.0, theta, steps // 2 + 1)[1:, None]
    psi = np.linspace(0.0, 2 * math.pi, 2 * steps, endpoint=False)[None, :]
    rim = (np.cos(psi)[..., None] * u1 + np.sin(psi)[..., None] * u2)
    zs = np.cos(phi)[..., None] * v + np.sin(phi)[..., None] * rim
    return np.concatenate([v[None, :], zs.reshape(-1, 3)], axis=0)
