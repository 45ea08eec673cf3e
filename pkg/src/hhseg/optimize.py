"""Full segmentation energy, shape-aware expansion moves, and the refit loop.

A move fixes a candidate label alpha and lets each pixel keep its current
label (x_p = 0, source side) or switch to alpha (x_p = 1, sink side). The
move graph carries the usual data unaries and Potts auxiliary-node pairs,
plus two families of infinite directed arcs:

  * for every constraint edge (p -> q) of alpha: forbid x_p = 1, x_q = 0,
    so the expanded segment satisfies alpha's shape prior everywhere;
  * for every constraint edge (p -> q) of another label k with both pixels
    currently labeled k: forbid x_q = 1, x_p = 0, so satisfied constraints
    of the other labels stay satisfied.

Every pairwise term is submodular as long as the current labeling is
feasible; this is asserted at build time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .appearance import (DataTermTable, GmmModel, SmoothnessWeights, data_term,
                         fit_gmm, smoothness_weights)
from .constraints import (ConstraintEdgeSet, apply_empty_cone_fix,
                          build_constraint_edges, check_feasibility,
                          prune_conflicting_edges)
from .distance import VectorField, euclidean_distance_transform, gradient_field
from .grid import (GridError, GridImage, Labeling, NeighborhoodSystem,
                   ScribbleSet, build_neighborhood, validate_scribbles)
from .maxflow import INF, FlowGraph


class OverConstrainedError(GridError):
    """The seed labeling already violates some shape constraint edges."""

    def __init__(self, violations):
        self.violations = violations
        preview = ", ".join(f"label {k}: {p}->{q}" for k, p, q in violations[:8])
        more = "" if len(violations) <= 8 else f" (+{len(violations) - 8} more)"
        super().__init__(f"over-constrained setup; violated edges: {preview}{more}")


class MoveInfeasibleError(GridError):
    """Expansion precondition failed: the current labeling is infeasible."""


class SubmodularityError(GridError):
    """A pairwise move term would be non-submodular (internal invariant)."""


@dataclass(frozen=True)
class EnergyBreakdown:
    data: float
    smoothness: float
    hedgehog: float
    total: float

    @classmethod
    def build(cls, data: float, smoothness: float, hedgehog: float) -> "EnergyBreakdown":
        return cls(data=data, smoothness=smoothness, hedgehog=hedgehog,
                   total=data + smoothness + hedgehog)

    def as_dict(self) -> dict:
        return {"data": self.data, "smoothness": self.smoothness,
                "hedgehog": self.hedgehog, "total": self.total}


@dataclass(frozen=True)
class SolverConfig:
    theta: float = math.pi / 4
    lam: float = 2.0
    neighborhood_size: int = 8
    gmm_components: int = 5
    max_outer_iterations: int = 10
    shape_labels: tuple[int, ...] | None = None  # None: all non-background labels
    rng_seed: int = 0
    background_label: int = 1
    prune: bool = True
    cone_fix: bool = True
    tol: float = 1e-9

    def __post_init__(self):
        if not (0.0 <= self.theta <= math.pi / 2):
            raise GridError(f"theta must be in [0, pi/2], got {self.theta}")
        if self.lam < 0:
            raise GridError("lambda must be >= 0")
        if self.gmm_components < 1 or self.max_outer_iterations < 1:
            raise GridError("gmm components and outer iterations must be >= 1")


@dataclass
class MoveProblem:
    alpha: int
    current: Labeling
    graph: FlowGraph
    num_pixels: int
    aux_base: int
    alpha_inf_arcs: np.ndarray                     # (A, 2) edges of alpha enforced everywhere
    preserved_inf_arcs: list[tuple[int, np.ndarray]]  # per other label, inside its support


def _columns(assignment: np.ndarray, labels: tuple[int, ...]) -> np.ndarray:
    arr = np.asarray(labels)
    sorter = np.argsort(arr)
    return sorter[np.searchsorted(arr[sorter], assignment)]


def total_energy(labeling: Labeling, data_terms: DataTermTable,
                 weights: SmoothnessWeights,
                 constraints: dict[int, ConstraintEdgeSet]) -> EnergyBreakdown:
    """Exact energy; the shape component is 0 when feasible, inf otherwise."""
    f = labeling.assignment
    cols = _columns(f, data_terms.labels)
    data = float(data_terms.values[np.arange(f.size), cols].sum())
    cut = f[weights.pairs_p] != f[weights.pairs_q]
    smooth = float(weights.lam * weights.weights[cut].sum())
    hedgehog = INF if check_feasibility(labeling, constraints) else 0.0
    return EnergyBreakdown.build(data, smooth, hedgehog)


def build_move_graph(current: Labeling, alpha: int, data_terms: DataTermTable,
                     weights: SmoothnessWeights,
                     constraints: dict[int, ConstraintEdgeSet]) -> MoveProblem:
    """Binary move graph with x_p = 0 meaning retain and x_p = 1 meaning alpha.

    Unaries come straight from the data table (seed pins ride along as its
    inf entries). Potts pairs with differing current labels use the standard
    auxiliary-node gadget; equal non-alpha pairs become one undirected arc.
    """
    violations = check_feasibility(current, constraints)
    if violations:
        raise MoveInfeasibleError(
            f"current labeling violates {len(violations)} constraint edges")
    f = current.assignment
    n = f.size
    g = FlowGraph(n)
    cols = _columns(f, data_terms.labels)
    j_alpha = data_terms.labels.index(alpha)
    retain_cost = data_terms.values[np.arange(n), cols]
    switch_cost = data_terms.values[:, j_alpha]
    g.add_terminal_caps_array(switch_cost.copy(), retain_cost.copy())

    cap = weights.lam * weights.weights
    pp, qq = weights.pairs_p, weights.pairs_q
    fp, fq = f[pp], f[qq]
    active = cap > 0
    same = active & (fp == fq) & (fp != alpha)
    g.add_arcs(pp[same], qq[same], cap[same], cap[same])

    diff = active & (fp != fq)
    n_aux = int(diff.sum())
    aux_base = g.add_node(n_aux) if n_aux else n
    if n_aux:
        aux = np.arange(aux_base, aux_base + n_aux)
        c = cap[diff]
        cp = np.where(fp[diff] != alpha, c, 0.0)  # cost of p leaving its side
        cq = np.where(fq[diff] != alpha, c, 0.0)
        mp = cp > 0
        mq = cq > 0
        g.add_arcs(pp[diff][mp], aux[mp], cp[mp], cp[mp])
        g.add_arcs(aux[mq], qq[diff][mq], cq[mq], cq[mq])
        g.add_terminal_caps_at(aux, np.zeros(n_aux), c)

    alpha_arcs = np.empty((0, 2), dtype=np.int64)
    es_alpha = constraints.get(alpha)
    if es_alpha is not None and es_alpha.num_edges:
        e = es_alpha.edges
        # submodular only if no such arc is already cut by the current labeling
        bad = (f[e[:, 0]] == alpha) & (f[e[:, 1]] != alpha)
        if bad.any():
            raise SubmodularityError(
                f"{int(bad.sum())} constraint arcs of label {alpha} are cut by the "
                f"current labeling")
        inf_arr = np.full(e.shape[0], INF)
        # forbid x_p = 1, x_q = 0: arc q -> p
        g.add_arcs(e[:, 1], e[:, 0], inf_arr, np.zeros(e.shape[0]))
        alpha_arcs = e

    preserved: list[tuple[int, np.ndarray]] = []
    for k, es in constraints.items():
        if k == alpha or es.num_edges == 0:
            continue
        e = es.edges
        inside = (f[e[:, 0]] == k) & (f[e[:, 1]] == k)
        if inside.any():
            kept = e[inside]
            inf_arr = np.full(kept.shape[0], INF)
            # forbid x_q = 1, x_p = 0: arc p -> q
            g.add_arcs(kept[:, 0], kept[:, 1], inf_arr, np.zeros(kept.shape[0]))
            preserved.append((k, kept))

    return MoveProblem(alpha=alpha, current=current, graph=g, num_pixels=n,
                       aux_base=aux_base, alpha_inf_arcs=alpha_arcs,
                       preserved_inf_arcs=preserved)


def expansion_move(current: Labeling, alpha: int, data_terms: DataTermTable,
                   weights: SmoothnessWeights,
                   constraints: dict[int, ConstraintEdgeSet],
                   tol: float = 1e-9) -> tuple[Labeling, EnergyBreakdown]:
    """Optimal single expansion toward alpha; identity moves return `current`."""
    problem = build_move_graph(current, alpha, data_terms, weights, constraints)
    result = problem.graph.solve()
    if result.flow_value == INF:
        raise GridError("expansion solve reported no finite cut from a feasible "
                        "labeling; internal invariant broken")
    switch = ~result.source_side[: problem.num_pixels]
    new_assign = np.where(switch, np.int32(alpha), current.assignment).astype(np.int32)
    if np.array_equal(new_assign, current.assignment):
        return current, total_energy(current, data_terms, weights, constraints)
    new_labeling = current.with_assignment(new_assign)
    energy = total_energy(new_labeling, data_terms, weights, constraints)
    old = total_energy(current, data_terms, weights, constraints)
    if not (energy.total <= old.total + tol):
        raise GridError(f"expansion increased energy {old.total} -> {energy.total}; "
                        f"internal invariant broken")
    return new_labeling, energy


def build_label_constraints(dims, scribbles: ScribbleSet, config: SolverConfig,
                            nbhd: NeighborhoodSystem,
                            external_fields: dict[int, VectorField] | None = None,
                            ) -> dict[int, ConstraintEdgeSet]:
    """Per-label constraint edges from seed distance fields or supplied fields."""
    external_fields = external_fields or {}
    if config.shape_labels is None:
        shape_labels = [k for k in scribbles.labels if k != config.background_label]
    else:
        shape_labels = list(config.shape_labels)
    out: dict[int, ConstraintEdgeSet] = {}
    for k in shape_labels:
        if k in external_fields:
            fld = external_fields[k]
        else:
            seeds = scribbles.pixels(k)
            if seeds.size == 0:
                continue
            dmap = euclidean_distance_transform(seeds, dims)
            fld = gradient_field(dmap)
        edges = build_constraint_edges(fld, nbhd, config.theta)
        if config.prune:
            edges = prune_conflicting_edges(edges, fld, nbhd, config.theta)
        if config.cone_fix:
            edges = apply_empty_cone_fix(edges, fld, nbhd, config.theta)
        out[k] = edges
    return out


def _fit_models(image: GridImage, samples_by_label: dict[int, np.ndarray],
                labels: tuple[int, ...], config: SolverConfig,
                previous: dict[int, GmmModel | None] | None = None,
                ) -> dict[int, GmmModel | None]:
    flat = image.flat()
    models: dict[int, GmmModel | None] = {}
    for j, k in enumerate(labels):
        px = samples_by_label.get(k)
        if px is None or px.size == 0:
            models[k] = previous.get(k) if previous else None
            continue
        models[k] = fit_gmm(flat[px], config.gmm_components, config.rng_seed + j)
    return models


def initial_labeling(scribbles: ScribbleSet, labels: tuple[int, ...],
                     background: int, num_pixels: int) -> Labeling:
    """Everything background except the scribbled pixels."""
    assign = np.full(num_pixels, background, dtype=np.int32)
    for k in scribbles.labels:
        assign[scribbles.pixels(k)] = k
    return Labeling(assignment=assign, labels=labels, background=background)


def segment(image: GridImage, scribbles: ScribbleSet, config: SolverConfig,
            external_fields: dict[int, VectorField] | None = None,
            labeling_callback=None) -> tuple[Labeling, EnergyBreakdown, list[dict]]:
    """Full pipeline: seed init, seed-fitted models, expansion cycles, refits.

    Returns the final labeling, its energy, and a log with one entry per move
    ({outer, inner, alpha, energy, changed_pixels}; refit rows have alpha None).
    `labeling_callback(labeling)`, when given, observes every intermediate
    labeling including the initialization.
    """
    problems = validate_scribbles(scribbles, image, background=config.background_label)
    if problems:
        raise GridError(f"invalid scribbles: {problems[:5]}")
    labels = tuple(sorted(set(scribbles.labels) | {config.background_label}))
    n = image.num_pixels
    nbhd = build_neighborhood(len(image.dims), config.neighborhood_size)
    constraints = build_label_constraints(image.dims, scribbles, config, nbhd,
                                          external_fields)

    current = initial_labeling(scribbles, labels, config.background_label, n)
    violations = check_feasibility(current, constraints)
    if violations:
        raise OverConstrainedError(violations)
    if labeling_callback:
        labeling_callback(current)

    seed_samples = {k: scribbles.pixels(k) for k in labels}
    models = _fit_models(image, seed_samples, labels, config)
    data = data_term(image, models, scribbles, labels)
    weights = smoothness_weights(image, nbhd, config.lam)

    log: list[dict] = []
    cur_e = total_energy(current, data, weights, constraints)
    prev_outer: float | None = None
    for outer in range(config.max_outer_iterations):
        if outer > 0:
            refit_samples = {}
            for k in labels:
                px = np.flatnonzero(current.assignment == k)
                seeds = scribbles.pixels(k)
                refit_samples[k] = np.union1d(px, seeds) if seeds.size else px
            models = _fit_models(image, refit_samples, labels, config, previous=models)
            data = data_term(image, models, scribbles, labels)
            cur_e = total_energy(current, data, weights, constraints)
            log.append({"outer": outer, "inner": None, "alpha": None,
                        "energy": cur_e.as_dict(), "changed_pixels": 0})
        inner = 0
        while True:
            improved = False
            for alpha in labels:
                new_lab, new_e = expansion_move(current, alpha, data, weights,
                                                constraints, tol=config.tol)
                changed = int((new_lab.assignment != current.assignment).sum())
                log.append({"outer": outer, "inner": inner, "alpha": int(alpha),
                            "energy": new_e.as_dict(), "changed_pixels": changed})
                if labeling_callback:
                    labeling_callback(new_lab)
                if new_e.total < cur_e.total - config.tol:
                    improved = True
                current, cur_e = new_lab, new_e
                inner += 1
            if not improved:
                break
        if prev_outer is not None and prev_outer - cur_e.total <= config.tol:
            break
        prev_outer = cur_e.total
    return current, cur_e, log


def brute_force_segment(image: GridImage, scribbles: ScribbleSet,
                        config: SolverConfig,
                        external_fields: dict[int, VectorField] | None = None,
                        ) -> tuple[Labeling, EnergyBreakdown]:
    """Exhaustive minimum over all labelings that keep the seed pins.

    Verification oracle: evaluates every candidate directly (no move graphs,
    no flow solver). Refuses instances beyond 16 pixels or 3 labels.
    """
    labels = tuple(sorted(set(scribbles.labels) | {config.background_label}))
    n = image.num_pixels
    if n > 16 or len(labels) > 3:
        raise GridError("brute force limited to <= 16 pixels and <= 3 labels")
    nbhd = build_neighborhood(len(image.dims), config.neighborhood_size)
    constraints = build_label_constraints(image.dims, scribbles, config, nbhd,
                                          external_fields)
    seed_samples = {k: scribbles.pixels(k) for k in labels}
    models = _fit_models(image, seed_samples, labels, config)
    data = data_term(image, models, scribbles, labels)
    weights = smoothness_weights(image, nbhd, config.lam)

    lab_count = len(labels)
    pinned = np.full(n, -1, dtype=np.int64)
    for j, k in enumerate(labels):
        pinned[scribbles.pixels(k)] = j
    free = np.flatnonzero(pinned < 0)
    n_free = free.size
    total_combos = lab_count ** n_free

    edge_cols = {k: _columns(np.full(1, k), data.labels)[0] for k in constraints}
    best_total = INF
    best_cols: np.ndarray | None = None
    chunk = 1 << 16
    powers = lab_count ** np.arange(n_free, dtype=np.int64)
    base = np.maximum(pinned, 0)
    for start in range(0, total_combos, chunk):
        codes = np.arange(start, min(start + chunk, total_combos), dtype=np.int64)
        cols = np.broadcast_to(base, (codes.size, n)).copy()
        if n_free:
            cols[:, free] = (codes[:, None] // powers[None, :]) % lab_count
        dat = data.values[np.arange(n)[None, :], cols].sum(axis=1)
        cut = cols[:, weights.pairs_p] != cols[:, weights.pairs_q]
        smo = weights.lam * (cut * weights.weights[None, :]).sum(axis=1)
        feasible = np.ones(codes.size, dtype=bool)
        for k, es in constraints.items():
            if es.num_edges == 0:
                continue
            j = edge_cols[k]
            viol = ((cols[:, es.edges[:, 0]] == j)
                    & (cols[:, es.edges[:, 1]] != j)).any(axis=1)
            feasible &= ~viol
        tot = np.where(feasible, dat + smo, INF)
        i = int(np.argmin(tot))
        if best_cols is None or tot[i] < best_total:
            best_total = float(tot[i])
            best_cols = cols[i].copy()
    assign = np.asarray(labels, dtype=np.int32)[best_cols]
    labeling = Labeling(assignment=assign, labels=labels,
                        background=config.background_label)
    return labeling, total_energy(labeling, data, weights, constraints)
