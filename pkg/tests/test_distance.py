import itertools
import math

import numpy as np
import pytest

from helpers import brute_force_edt
from hhseg.distance import (euclidean_distance_transform, gradient_field,
                            load_vector_field, radial_field, save_vector_field,
                            signed_distance, VectorField)
from hhseg.grid import GridError, pixel_index


def test_edt_point_source_3x3():
    d = euclidean_distance_transform([0], (3, 3))
    assert d.values[0, 0] == 0.0
    assert d.values[2, 0] == 2.0
    assert d.values[2, 2] == 2.0 * math.sqrt(2.0)


def test_edt_all_sources_zero():
    d = euclidean_distance_transform(range(12), (3, 4))
    assert (d.values == 0.0).all()


def test_edt_empty_source_rejected():
    with pytest.raises(GridError):
        euclidean_distance_transform([], (3, 3))


def test_edt_random_6x6_equals_brute_force_exactly():
    rng = np.random.default_rng(7)
    for _ in range(20):
        mask = rng.random((6, 6)) < 0.25
        if not mask.any():
            mask[3, 2] = True
        d = euclidean_distance_transform(mask, (6, 6))
        coords = list(zip(*np.nonzero(mask)))
        expected = brute_force_edt(coords, (6, 6))
        assert (d.values == expected).all()  # bit-for-bit


def test_edt_exact_on_all_small_grids():
    rng = np.random.default_rng(11)
    for h in range(1, 9):
        for w in range(1, 9):
            mask = rng.random((h, w)) < 0.3
            mask.reshape(-1)[rng.integers(h * w)] = True
            d = euclidean_distance_transform(mask, (h, w))
            expected = brute_force_edt(list(zip(*np.nonzero(mask))), (h, w))
            assert (d.values == expected).all()


def test_edt_3d_matches_brute_force():
    rng = np.random.default_rng(3)
    mask = rng.random((4, 3, 4)) < 0.2
    mask[1, 1, 2] = True
    d = euclidean_distance_transform(mask, (4, 3, 4))
    expected = brute_force_edt(list(zip(*np.nonzero(mask))), (4, 3, 4))
    assert (d.values == expected).all()


def test_edt_lipschitz_over_neighbors():
    rng = np.random.default_rng(5)
    mask = rng.random((10, 10)) < 0.1
    mask[0, 0] = True
    d = euclidean_distance_transform(mask, (10, 10)).values
    for dr, dc in [(0, 1), (1, 0), (1, 1), (1, -1)]:
        step = math.hypot(dr, dc)
        a = d[max(0, -dr):10 - max(0, dr), max(0, -dc):10 - max(0, dc)]
        b = d[max(0, dr):10 - max(0, -dr), max(0, dc):10 - max(0, -dc)]
        assert (np.abs(a - b) <= step + 1e-9).all()


def test_signed_distance_square():
    mask = np.zeros((5, 5), dtype=bool)
    mask[1:4, 1:4] = True
    d = signed_distance(mask, (5, 5)).values
    assert d[2, 2] == -1.0  # center: one pixel from the region rim
    assert d[0, 0] > 0.0


def test_signed_distance_magnitude_is_boundary_edt():
    mask = np.zeros((6, 7), dtype=bool)
    mask[2:5, 1:5] = True
    d = signed_distance(mask, (6, 7)).values
    boundary = np.zeros((6, 7), dtype=bool)
    for r in range(6):
        for c in range(7):
            for dr, dc in ((0, 1), (0, -1), (1, 0), (-1, 0)):
                rr, cc = r + dr, c + dc
                if 0 <= rr < 6 and 0 <= cc < 7 and mask[rr, cc] != mask[r, c]:
                    boundary[r, c] = True
    expected = brute_force_edt(list(zip(*np.nonzero(boundary))), (6, 7))
    assert np.allclose(np.abs(d), expected)


def test_signed_distance_complement_negates():
    mask = np.zeros((5, 5), dtype=bool)
    mask[1:4, 1:4] = True
    d1 = signed_distance(mask, (5, 5)).values
    d2 = signed_distance(~mask, (5, 5)).values
    assert np.array_equal(d1, -d2)


def test_signed_distance_degenerate_masks():
    with pytest.raises(GridError):
        signed_distance(np.zeros((4, 4), dtype=bool), (4, 4))
    with pytest.raises(GridError):
        signed_distance(np.ones((4, 4), dtype=bool), (4, 4))


def test_gradient_on_a_line():
    d = euclidean_distance_transform([0], (8, 1))
    f = gradient_field(d)
    assert f.defined[3, 0]
    assert np.allclose(f.vectors[3, 0], [1.0, 0.0])


def test_gradient_constant_map_undefined():
    d = euclidean_distance_transform(range(12), (3, 4))
    f = gradient_field(d)
    assert not f.defined.any()


def test_gradient_radial_alignment_9x9():
    # central differences reproduce the analytic radial direction exactly on
    # the rows/columns/diagonals through the source and to ~1e-3 elsewhere
    dims, src = (9, 9), (4, 4)
    d = euclidean_distance_transform([pixel_index(src, dims)], dims)
    f = gradient_field(d)
    assert not f.defined[src]
    for r, c in itertools.product(range(9), range(9)):
        if (r, c) == src:
            continue
        assert f.defined[r, c]
        exact = np.array([r - src[0], c - src[1]], dtype=float)
        exact /= np.linalg.norm(exact)
        dot = float(f.vectors[r, c] @ exact)
        on_axis = r == src[0] or c == src[1] or abs(r - src[0]) == abs(c - src[1])
        assert dot >= (1.0 - 1e-12 if on_axis else 0.999)


def test_gradient_unit_norm_invariant_random_maps():
    rng = np.random.default_rng(0)
    for _ in range(200):
        from hhseg.distance import DistanceMap
        vals = rng.random((6, 6))
        f = gradient_field(DistanceMap(dims=(6, 6), values=vals))
        norms = np.linalg.norm(f.vectors[f.defined], axis=1)
        if norms.size:
            assert np.abs(norms - 1.0).max() <= 1e-9


def test_radial_field_helper():
    f = radial_field((5, 5), (2.5, 2.25))
    assert f.defined.all()
    v = f.vectors[0, 0]
    expected = np.array([-2.5, -2.25]) / np.linalg.norm([-2.5, -2.25])
    assert np.allclose(v, expected)


def test_field_file_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    vecs = rng.normal(size=(4, 5, 2))
    vecs /= np.linalg.norm(vecs, axis=-1, keepdims=True)
    defined = np.ones((4, 5), dtype=bool)
    defined[2, 3] = False
    vecs[2, 3] = 0.0
    f = VectorField(dims=(4, 5), vectors=vecs, defined=defined)
    path = tmp_path / "f.hhvf"
    save_vector_field(f, path)
    g = load_vector_field(path)
    assert g.dims == (4, 5)
    assert np.array_equal(g.defined, defined)
    assert np.abs(g.vectors[defined] - vecs[defined]).max() <= 1e-6


def test_field_file_uniform_and_zero(tmp_path):
    vecs = np.zeros((3, 3, 2))
    vecs[..., 0] = 1.0
    vecs[1, 1] = 0.0
    f = VectorField(dims=(3, 3), vectors=vecs,
                    defined=np.linalg.norm(vecs, axis=-1) > 0)
    path = tmp_path / "u.hhvf"
    save_vector_field(f, path)
    g = load_vector_field(path)
    assert not g.defined[1, 1]
    assert np.allclose(g.vectors[0, 0], [1.0, 0.0])


def test_field_file_malformed(tmp_path):
    bad = tmp_path / "bad.hhvf"
    bad.write_bytes(b"NOPE" + b"\0" * 32)
    with pytest.raises(GridError):
        load_vector_field(bad)
    trunc = tmp_path / "trunc.hhvf"
    trunc.write_bytes(b"HHVF" + (2).to_bytes(4, "little")
                      + (4).to_bytes(4, "little") + (4).to_bytes(4, "little")
                      + b"\0" * 8)
    with pytest.raises(GridError):
        load_vector_field(trunc)
