import itertools
import math

import numpy as np
import pytest

from helpers import cone_direction_samples, feasible_segments
from hhseg.constraints import (ConeParams, apply_empty_cone_fix,
                               build_constraint_edges, check_feasibility,
                               dump_edges, polar_cone_contains,
                               prune_conflicting_edges, TAG_CONE, TAG_FIX)
from hhseg.distance import VectorField, radial_field
from hhseg.grid import GridError, Labeling, build_neighborhood, pixel_index
from hhseg.synth import generate_synthetic


def uniform_field(dims, v):
    vecs = np.zeros((*dims, len(v)))
    vecs[:] = np.asarray(v, dtype=float)
    return VectorField(dims=dims, vectors=vecs, defined=np.ones(dims, dtype=bool))


def undefined_field(dims):
    return VectorField(dims=dims, vectors=np.zeros((*dims, len(dims))),
                       defined=np.zeros(dims, dtype=bool))


def test_cone_params():
    cp = ConeParams.from_theta(math.pi / 3)
    assert abs(cp.tau_equivalent - 0.5) < 1e-12
    with pytest.raises(GridError):
        ConeParams(theta=0.3, tau_equivalent=0.0)
    with pytest.raises(GridError):
        ConeParams.from_theta(2.0)


def test_polar_cone_contains_examples():
    for theta in (0.0, 0.4, math.pi / 4, math.pi / 2):
        assert polar_cone_contains((1, 0), (-1, 0), theta)      # antiparallel
        assert not polar_cone_contains((1, 0), (1, 0), theta)   # parallel
    assert polar_cone_contains((1, 0), (0, 1), 0.0)             # boundary inclusive
    assert not polar_cone_contains((1, 0), (0, 1), math.pi / 4)
    with pytest.raises(GridError):
        polar_cone_contains((2, 0), (1, 0), 0.1)


def test_polar_cone_dot_test_matches_sampled_definition():
    # the raw definition: e is in the polar cone iff <e, z> <= 0 for every
    # direction z inside the allowed cone; verified by dense sampling
    rng = np.random.default_rng(42)
    checked = 0
    while checked < 10_000:
        dim = 2 if checked % 2 == 0 else 3
        v = rng.normal(size=dim)
        v /= np.linalg.norm(v)
        e = rng.normal(size=dim)
        e /= np.linalg.norm(e)
        theta = rng.uniform(0.0, math.pi / 2)
        margin = float(e @ v) + math.sin(theta)
        if abs(margin) < 2e-3:
            continue  # too close to the boundary for a sampled oracle
        zs = cone_direction_samples(v, theta)
        oracle = bool((zs @ e <= 1e-12).all())
        assert polar_cone_contains(v, e, theta) == oracle
        checked += 1


def enumerate_edges_oracle(field, nbhd, theta):
    """Direct per-pixel, per-offset evaluation of the inclusion rule."""
    dims = field.dims
    out = set()
    thresh = -math.sin(theta)
    for coords in itertools.product(*[range(d) for d in dims]):
        p = pixel_index(coords, dims)
        for k in range(nbhd.size):
            off = nbhd.offsets[k]
            qc = tuple(c + int(o) for c, o in zip(coords, off))
            if not all(0 <= c < d for c, d in zip(qc, dims)):
                continue
            q = pixel_index(qc, dims)
            e_hat = off / np.linalg.norm(off)
            ok = False
            if field.defined[coords] and float(field.vectors[coords] @ e_hat) <= thresh:
                ok = True
            if field.defined[qc] and float(field.vectors[qc] @ e_hat) <= thresh:
                ok = True
            if ok:
                out.add((p, q))
    return out


def test_build_uniform_field_4nbhd_theta0():
    f = uniform_field((3, 3), (1.0, 0.0))
    nb = build_neighborhood(2, 4)
    es = build_constraint_edges(f, nb, 0.0)
    got = {tuple(e) for e in es.edges.tolist()}
    assert got == enumerate_edges_oracle(f, nb, 0.0)
    # included offsets are exactly (-1,0), (0,1), (0,-1)
    offs = {tuple(nb.offsets[i]) for i in es.offset_index.tolist()}
    assert offs == {(-1, 0), (0, 1), (0, -1)}


def test_build_uniform_field_8nbhd_theta_half_pi():
    f = uniform_field((4, 4), (1.0, 0.0))
    nb = build_neighborhood(2, 8)
    es = build_constraint_edges(f, nb, math.pi / 2)
    offs = {tuple(nb.offsets[i]) for i in es.offset_index.tolist()}
    assert offs == {(-1, 0)}  # only the exactly antiparallel offset survives
    assert es.num_edges == 12  # all in-bounds pairs with that offset


def test_build_undefined_field_empty():
    nb = build_neighborhood(2, 8)
    es = build_constraint_edges(undefined_field((4, 4)), nb, 0.3)
    assert es.num_edges == 0


def test_build_matches_oracle_random_fields():
    rng = np.random.default_rng(3)
    nb = build_neighborhood(2, 8)
    for _ in range(10):
        vecs = rng.normal(size=(4, 5, 2))
        defined = rng.random((4, 5)) > 0.2
        vecs /= np.maximum(np.linalg.norm(vecs, axis=-1, keepdims=True), 1e-12)
        vecs[~defined] = 0.0
        f = VectorField(dims=(4, 5), vectors=vecs, defined=defined)
        theta = rng.uniform(0, math.pi / 2)
        es = build_constraint_edges(f, nb, theta)
        assert {tuple(e) for e in es.edges.tolist()} == \
            enumerate_edges_oracle(f, nb, theta)
        # no duplicates, canonical order
        assert len({tuple(e) for e in es.edges.tolist()}) == es.num_edges


def test_theta_monotonicity_raw_sets():
    rng = np.random.default_rng(9)
    nb = build_neighborhood(2, 8)
    vecs = rng.normal(size=(5, 5, 2))
    vecs /= np.linalg.norm(vecs, axis=-1, keepdims=True)
    f = VectorField(dims=(5, 5), vectors=vecs, defined=np.ones((5, 5), dtype=bool))
    prev = None
    for theta in (0.0, math.pi / 8, math.pi / 4, 3 * math.pi / 8, math.pi / 2):
        cur = {tuple(e) for e in build_constraint_edges(f, nb, theta).edges.tolist()}
        if prev is not None:
            assert cur <= prev
        prev = cur


def test_prune_uniform_is_noop():
    f = uniform_field((4, 4), (0.0, 1.0))
    nb = build_neighborhood(2, 8)
    es = build_constraint_edges(f, nb, math.pi / 4)
    pr = prune_conflicting_edges(es, f, nb, math.pi / 4)
    assert pr.pruned and pr.num_edges == es.num_edges
    assert np.array_equal(pr.edges, es.edges)


def test_prune_keeps_degenerate_antiparallel_midpoint():
    vecs = np.zeros((1, 2, 2))
    vecs[0, 0] = (1.0, 0.0)
    vecs[0, 1] = (-1.0, 0.0)
    f = VectorField(dims=(1, 2), vectors=vecs, defined=np.ones((1, 2), dtype=bool))
    nb = build_neighborhood(2, 4)
    es = build_constraint_edges(f, nb, 0.0)
    between = [(p, q) for p, q in es.edges.tolist() if {p, q} == {0, 1}]
    assert between  # both directions present at theta=0
    pr = prune_conflicting_edges(es, f, nb, 0.0)
    kept = [(p, q) for p, q in pr.edges.tolist() if {p, q} == {0, 1}]
    assert kept == between


def test_prune_unlocks_rotating_field():
    # orientation turns 90 degrees per column: raw edges tie the whole window
    # together; pruning by the interpolated orientation frees real segments
    inst = generate_synthetic("rotating-field", dims=(4, 4), noise=0.0)
    nb = build_neighborhood(2, 8)
    raw = build_constraint_edges(inst.field, nb, 0.0)
    masks_raw = feasible_segments(raw.edges.tolist(), 16)
    assert masks_raw == [0, (1 << 16) - 1]  # only all-out / all-in
    pruned = prune_conflicting_edges(raw, inst.field, nb, 0.0)
    masks_pruned = feasible_segments(pruned.edges.tolist(), 16)
    nontrivial = [m for m in masks_pruned if m not in (0, (1 << 16) - 1)]
    assert nontrivial


def test_empty_cone_fix_radial_field():
    # radial field about an off-lattice center: no vector aligns with any of
    # the 8 offsets, so the raw set at theta=pi/2 is empty and the fix gives
    # every pixel exactly one outgoing edge toward its most antiparallel
    # neighbor
    dims = (9, 9)
    f = radial_field(dims, (4.5, 4.25))
    nb = build_neighborhood(2, 8)
    raw = build_constraint_edges(f, nb, math.pi / 2)
    assert raw.num_edges == 0
    fixed = apply_empty_cone_fix(raw, f, nb, math.pi / 2)
    assert fixed.cone_fixed
    assert fixed.num_edges == 81
    assert (fixed.tags == TAG_FIX).all()
    outgoing = {}
    for (p, q), oi in zip(fixed.edges.tolist(), fixed.offset_index.tolist()):
        assert p not in outgoing
        outgoing[p] = (q, oi)
    units = nb.unit_offsets()
    for coords in itertools.product(range(9), range(9)):
        p = pixel_index(coords, dims)
        v = f.vectors[coords]
        dots = units @ v
        best = np.flatnonzero(dots == dots.min())
        candidates = {tuple(nb.offsets[i]) for i in best}
        q, oi = outgoing[p]
        assert tuple(nb.offsets[oi]) in candidates


def test_empty_cone_fix_leaves_satisfied_pixels_alone():
    f = uniform_field((4, 4), (1.0, 0.0))
    nb = build_neighborhood(2, 8)
    es = build_constraint_edges(f, nb, math.pi / 2)
    fixed = apply_empty_cone_fix(es, f, nb, math.pi / 2)
    # rows 1..3 already own the exactly antiparallel edge; row 0's argmin
    # target is out of bounds, so nothing is added anywhere
    assert fixed.num_edges == es.num_edges
    assert (fixed.tags == TAG_CONE).all()


def test_empty_cone_fix_fills_partial_cones():
    # field tilted so no 8-neighborhood edge falls in the tiny polar cone
    ang = 0.2
    f = uniform_field((3, 3), (math.cos(ang), math.sin(ang)))
    nb = build_neighborhood(2, 8)
    es = build_constraint_edges(f, nb, math.pi / 2)
    assert es.num_edges == 0
    fixed = apply_empty_cone_fix(es, f, nb, math.pi / 2)
    # most antiparallel offset is (-1, 0) for this tilt
    offs = {tuple(nb.offsets[i]) for i in fixed.offset_index.tolist()}
    assert offs == {(-1, 0)}
    assert fixed.num_edges == 6  # rows 1 and 2 (row 0 targets out of bounds)


def test_check_feasibility_examples():
    dims = (3, 3)
    f = uniform_field(dims, (1.0, 0.0))
    nb = build_neighborhood(2, 4)
    es = build_constraint_edges(f, nb, math.pi / 2)  # edges with offset (-1,0)
    labels = (1, 2)
    all_bg = Labeling(assignment=np.ones(9, dtype=np.int32), labels=labels,
                      background=1)
    assert check_feasibility(all_bg, {2: es}) == []
    all_fg = Labeling(assignment=np.full(9, 2, dtype=np.int32), labels=labels,
                      background=1)
    assert check_feasibility(all_fg, {2: es}) == []
    one = np.ones(9, dtype=np.int32)
    one[pixel_index((1, 1), dims)] = 2
    single = Labeling(assignment=one, labels=labels, background=1)
    viols = check_feasibility(single, {2: es})
    assert viols == [(2, pixel_index((1, 1), dims), pixel_index((0, 1), dims))]


def test_feasibility_equals_closure_property():
    rng = np.random.default_rng(17)
    nb = build_neighborhood(2, 8)
    vecs = rng.normal(size=(3, 3, 2))
    vecs /= np.linalg.norm(vecs, axis=-1, keepdims=True)
    f = VectorField(dims=(3, 3), vectors=vecs, defined=np.ones((3, 3), dtype=bool))
    es = build_constraint_edges(f, nb, math.pi / 4)
    closed = set(feasible_segments(es.edges.tolist(), 9))
    for bits in rng.integers(0, 1 << 9, size=100):
        assign = np.where([(int(bits) >> i) & 1 for i in range(9)], 2, 1).astype(np.int32)
        lab = Labeling(assignment=assign, labels=(1, 2), background=1)
        ok = not check_feasibility(lab, {2: es})
        assert ok == (int(bits) in closed)


def test_prune_never_touches_fix_edges():
    # pruning after the fix stage is out of the normal order, but if it
    # happens it must only ever evaluate cone-tagged edges
    dims = (5, 5)
    f = radial_field(dims, (2.5, 2.25))
    nb = build_neighborhood(2, 8)
    fixed = apply_empty_cone_fix(build_constraint_edges(f, nb, math.pi / 2),
                                 f, nb, math.pi / 2)
    assert (fixed.tags == TAG_FIX).all()
    pruned = prune_conflicting_edges(fixed, f, nb, math.pi / 2)
    assert pruned.num_edges == fixed.num_edges


def test_build_3d_26_neighborhood():
    dims = (5, 5, 5)
    f = radial_field(dims, (2.5, 2.25, 2.125))
    nb = build_neighborhood(3, 26)
    sets = {}
    for theta in (0.0, math.pi / 4, math.pi / 2):
        es = build_constraint_edges(f, nb, theta)
        got = {tuple(e) for e in es.edges.tolist()}
        assert got == enumerate_edges_oracle(f, nb, theta)
        sets[theta] = got
    assert sets[math.pi / 2] <= sets[math.pi / 4] <= sets[0.0]
    # off-lattice center: nothing aligns exactly, so the right-angle set is
    # empty and the fix then covers every pixel
    assert sets[math.pi / 2] == set()
    fixed = apply_empty_cone_fix(build_constraint_edges(f, nb, math.pi / 2),
                                 f, nb, math.pi / 2)
    outgoing = np.bincount(fixed.edges[:, 0], minlength=125)
    assert (outgoing == 1).all()


def test_dump_edges_golden():
    f = uniform_field((2, 2), (1.0, 0.0))
    nb = build_neighborhood(2, 4)
    es = build_constraint_edges(f, nb, math.pi / 2)
    assert dump_edges(es) == "(1, 0) -> (0, 0) cone\n(1, 1) -> (0, 1) cone"
