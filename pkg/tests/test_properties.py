"""Property-based checks over randomized inputs."""
import math

import numpy as np
from hypothesis import given, settings, strategies as st

from helpers import brute_force_edt
from hhseg.constraints import build_constraint_edges, polar_cone_contains
from hhseg.distance import VectorField, euclidean_distance_transform
from hhseg.grid import build_neighborhood
from hhseg.service import rle_encode_rows
from hhseg.grid import Labeling


@given(st.integers(1, 7), st.integers(1, 7), st.integers(0, 2 ** 32 - 1))
@settings(max_examples=60, deadline=None)
def test_edt_matches_brute_force(h, w, seed):
    rng = np.random.default_rng(seed)
    mask = rng.random((h, w)) < 0.3
    mask.reshape(-1)[int(rng.integers(h * w))] = True
    d = euclidean_distance_transform(mask, (h, w))
    expected = brute_force_edt(list(zip(*np.nonzero(mask))), (h, w))
    assert (d.values == expected).all()


@given(st.floats(0.0, math.pi / 2), st.floats(0.0, math.pi / 2),
       st.integers(0, 2 ** 32 - 1))
@settings(max_examples=80, deadline=None)
def test_polar_cone_monotone_in_theta(t1, t2, seed):
    # widening the allowed-normal cone can only shrink the polar cone
    lo, hi = sorted((t1, t2))
    rng = np.random.default_rng(seed)
    v = rng.normal(size=2)
    v /= np.linalg.norm(v)
    e = rng.normal(size=2)
    e /= np.linalg.norm(e)
    if polar_cone_contains(v, e, hi):
        assert polar_cone_contains(v, e, lo)


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([4, 8, 16]))
@settings(max_examples=30, deadline=None)
def test_edge_sets_shrink_with_theta(seed, nbhd_size):
    rng = np.random.default_rng(seed)
    vecs = rng.normal(size=(4, 4, 2))
    vecs /= np.linalg.norm(vecs, axis=-1, keepdims=True)
    f = VectorField(dims=(4, 4), vectors=vecs, defined=np.ones((4, 4), dtype=bool))
    nb = build_neighborhood(2, nbhd_size)
    thetas = sorted(rng.uniform(0, math.pi / 2, size=3))
    sets = [
        {tuple(e) for e in build_constraint_edges(f, nb, t).edges.tolist()}
        for t in thetas
    ]
    assert sets[2] <= sets[1] <= sets[0]


@given(st.integers(1, 6), st.integers(1, 9), st.integers(0, 2 ** 32 - 1))
@settings(max_examples=50, deadline=None)
def test_rle_rows_cover_each_row(h, w, seed):
    rng = np.random.default_rng(seed)
    assign = rng.choice([1, 2, 3], size=h * w).astype(np.int32)
    lab = Labeling(assignment=assign, labels=(1, 2, 3), background=1)
    rows = rle_encode_rows(lab, (h, w))
    decoded = []
    for row in rows:
        total = 0
        for label, count in row:
            assert count > 0
            decoded.extend([label] * count)
            total += count
        assert total == w
    assert np.array_equal(np.asarray(decoded, dtype=np.int32), assign)
