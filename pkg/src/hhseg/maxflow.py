"""Exact s/t max-flow / min-cut on sparse directed graphs with infinite capacities.

Infinity is IEEE +inf: a true sentinel under saturating addition, so there is
no "large enough constant" to tune. An instance with no finite cut (every s-t
cut crosses an infinite arc) is detected and reported as flow_value = inf.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

INF = float("inf")


@dataclass(frozen=True)
class CutResult:
    """Flow value and per-node cut side (True = source side)."""

    flow_value: float
    source_side: np.ndarray


@njit(cache=True)
def _dinic(num_nodes, s, t, adj_start, adj_arc, arc_to, cap):
    level = np.empty(num_nodes, np.int64)
    ptr = np.empty(num_nodes, np.int64)
    queue = np.empty(num_nodes, np.int64)
    path_arc = np.empty(num_nodes, np.int64)
    path_node = np.empty(num_nodes, np.int64)
    flow = 0.0
    while True:
        for i in range(num_nodes):
            level[i] = -1
        level[s] = 0
        queue[0] = s
        qh, qt = 0, 1
        while qh < qt:
            u = queue[qh]
            qh += 1
            for ai in range(adj_start[u], adj_start[u + 1]):
                a = adj_arc[ai]
                v = arc_to[a]
                if cap[a] > 0.0 and level[v] < 0:
                    level[v] = level[u] + 1
                    queue[qt] = v
                    qt += 1
        if level[t] < 0:
            return flow, False, level
        for i in range(num_nodes):
            ptr[i] = adj_start[i]
        while True:
            v = s
            depth = 0
            while v != t:
                moved = False
                while ptr[v] < adj_start[v + 1]:
                    a = adj_arc[ptr[v]]
                    w = arc_to[a]
                    if cap[a] > 0.0 and level[w] == level[v] + 1:
                        path_arc[depth] = a
                        path_node[depth] = v
                        depth += 1
                        v = w
                        moved = True
                        break
                    ptr[v] += 1
                if moved:
                    continue
                level[v] = -1  # dead end for this phase
                if depth == 0:
                    break
                depth -= 1
                v = path_node[depth]
                ptr[v] += 1
            if v != t:
                break  # blocking flow complete
            bottleneck = np.inf
            for i in range(depth):
                a = path_arc[i]
                if cap[a] < bottleneck:
                    bottleneck = cap[a]
            if bottleneck == np.inf:
                # an all-infinite augmenting path: no finite cut exists
                return np.inf, True, level
            for i in range(depth):
                a = path_arc[i]
                cap[a] -= bottleneck
                cap[a ^ 1] += bottleneck
            flow += bottleneck


class FlowGraph:
    """Accumulating graph builder plus exact solver.

    Construction is not thread-safe; a built instance may be solved repeatedly
    and deterministically (solving never mutates the stored capacities).
    """

    def __init__(self, node_count: int = 0):
        self._n = int(node_count)
        self._src = np.zeros(self._n, dtype=np.float64)
        self._snk = np.zeros(self._n, dtype=np.float64)
        self._chunks: list[tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = []

    @property
    def node_count(self) -> int:
        return self._n

    def add_node(self, count: int = 1) -> int:
        first = self._n
        self._n += int(count)
        self._src = np.concatenate([self._src, np.zeros(count)])
        self._snk = np.concatenate([self._snk, np.zeros(count)])
        return first

    def _check_node(self, p: int):
        if not (0 <= p < self._n):
            raise ValueError(f"node {p} out of range (have {self._n})")

    @staticmethod
    def _check_caps(*caps):
        for c in caps:
            arr = np.asarray(c, dtype=np.float64)
            if np.isnan(arr).any() or (arr < 0).any():
                raise ValueError("capacities must be non-negative (inf allowed)")

    def add_terminal_caps(self, p: int, cap_source, cap_sink) -> None:
        self._check_node(p)
        self._check_caps(cap_source, cap_sink)
        self._src[p] += cap_source  # inf-absorbing by IEEE semantics
        self._snk[p] += cap_sink

    def add_terminal_caps_array(self, cap_source: np.ndarray, cap_sink: np.ndarray) -> None:
        self._check_caps(cap_source, cap_sink)
        self._src += cap_source
        self._snk += cap_sink

    def add_terminal_caps_at(self, nodes: np.ndarray, cap_source: np.ndarray,
                             cap_sink: np.ndarray) -> None:
        self._check_caps(cap_source, cap_sink)
        np.add.at(self._src, nodes, cap_source)
        np.add.at(self._snk, nodes, cap_sink)

    def add_arc(self, p: int, q: int, cap_pq, cap_qp) -> None:
        self._check_node(p)
        self._check_node(q)
        self._check_caps(cap_pq, cap_qp)
        self.add_arcs(np.array([p]), np.array([q]),
                      np.array([cap_pq], dtype=np.float64),
                      np.array([cap_qp], dtype=np.float64))

    def add_arcs(self, ps: np.ndarray, qs: np.ndarray,
                 caps_pq: np.ndarray, caps_qp: np.ndarray) -> None:
        """Bulk arc insertion; repeated (p, q) pairs behave as summed capacities."""
        ps = np.asarray(ps, dtype=np.int64)
        qs = np.asarray(qs, dtype=np.int64)
        caps_pq = np.asarray(caps_pq, dtype=np.float64)
        caps_qp = np.asarray(caps_qp, dtype=np.float64)
        if ps.size == 0:
            return
        if ps.min() < 0 or qs.min() < 0 or ps.max() >= self._n or qs.max() >= self._n:
            raise ValueError("arc endpoint out of range")
        self._check_caps(caps_pq, caps_qp)
        self._chunks.append((ps, qs, caps_pq, caps_qp))

    def terminal_caps(self, p: int) -> tuple[float, float]:
        self._check_node(p)
        return float(self._src[p]), float(self._snk[p])

    def arc_cap(self, p: int, q: int) -> float:
        """Effective (summed) capacity of the directed arc p->q."""
        total = 0.0
        for ps, qs, cpq, cqp in self._chunks:
            total += cpq[(ps == p) & (qs == q)].sum()
            total += cqp[(qs == p) & (ps == q)].sum()
        return float(total)

    def _assemble(self):
        n = self._n
        s, t = n, n + 1
        froms, tos, caps = [], [], []

        def arc_pair(u, v, c_uv, c_vu):
            froms.append(u)
            tos.append(v)
            caps.append(c_uv)
            froms.append(v)
            tos.append(u)
            caps.append(c_vu)

        src_nodes = np.flatnonzero(self._src > 0)
        snk_nodes = np.flatnonzero(self._snk > 0)
        arc_pair(np.full(src_nodes.size, s), src_nodes, self._src[src_nodes],
                 np.zeros(src_nodes.size))
        arc_pair(snk_nodes, np.full(snk_nodes.size, t), self._snk[snk_nodes],
                 np.zeros(snk_nodes.size))
        for ps, qs, cpq, cqp in self._chunks:
            arc_pair(ps, qs, cpq, cqp)

        def interleave(pairs):
            # arcs stored so that reverse(i) == i ^ 1
            a, b = pairs
            out = np.empty(a.size + b.size, dtype=a.dtype)
            out[0::2] = a
            out[1::2] = b
            return out

        if froms:
            arc_from = interleave((np.concatenate(froms[0::2]).astype(np.int64),
                                   np.concatenate(froms[1::2]).astype(np.int64)))
            arc_to = interleave((np.concatenate(tos[0::2]).astype(np.int64),
                                 np.concatenate(tos[1::2]).astype(np.int64)))
            cap = interleave((np.concatenate(caps[0::2]).astype(np.float64),
                              np.concatenate(caps[1::2]).astype(np.float64)))
        else:
            arc_from = np.empty(0, dtype=np.int64)
            arc_to = np.empty(0, dtype=np.int64)
            cap = np.empty(0, dtype=np.float64)

        order = np.argsort(arc_from, kind="stable")
        counts = np.bincount(arc_from, minlength=n + 2)
        adj_start = np.zeros(n + 3, dtype=np.int64)
        np.cumsum(counts, out=adj_start[1:])
        return s, t, adj_start, order, arc_to, cap

    def solve(self) -> CutResult:
        """Maximum flow and minimum cut; deterministic for a fixed insertion order.

        If no finite cut exists, flow_value is inf and the diagnostic partition
        puts every user node on the sink side.
        """
        s, t, adj_start, adj_arc, arc_to, cap = self._assemble()
        flow, no_finite_cut, level = _dinic(self._n + 2, s, t, adj_start, adj_arc,
                                            arc_to, cap.copy())
        if no_finite_cut:
            return CutResult(flow_value=INF,
                             source_side=np.zeros(self._n, dtype=bool))
        return CutResult(flow_value=float(flow), source_side=level[: self._n] >= 0)


def cut_capacity(graph: FlowGraph, source_side: np.ndarray) -> float:
    """Capacity of the cut induced by a source-side indicator (test utility)."""
    total = 0.0
    total += graph._src[~source_side].sum()
    total += graph._snk[source_side].sum()
    for ps, qs, cpq, cqp in graph._chunks:
        total += cpq[source_side[ps] & ~source_side[qs]].sum()
        total += cqp[source_side[qs] & ~source_side[ps]].sum()
    return float(total)
