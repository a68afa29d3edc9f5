"""Smoke tests for the _posekit extension module."""

import math

import numpy as np
import pytest

import _posekit as pk


def test_geodesic_distance_basics():
    eye = np.eye(3)
    assert pk.geodesic_distance(eye, eye) == pytest.approx(0.0)
    rz = pk.euler_to_rotation(0.0, 0.0, math.pi)
    assert pk.geodesic_distance(rz, eye) == pytest.approx(math.pi)


def test_sixd_roundtrip():
    r = pk.random_rotation(seed=3)
    a1, a2 = pk.rotation_to_sixd(r)
    back = pk.sixd_to_rotation(a1, a2)
    assert np.allclose(back, r, atol=1e-12)
    assert pk.is_rotation(back)


def test_bin_table_and_pose_codec():
    table = pk.generate_bin_table(32, seed=7)
    assert table.n == 32
    assert 0 < table.spacing < table.covering_radius
    r = pk.random_rotation(seed=11)
    bin_index, delta = pk.encode_pose(r, table)
    assert bin_index == pk.nearest_bin(r, table)
    assert np.allclose(pk.decode_pose(bin_index, delta, table), r, atol=1e-9)


def test_soft_labels_activate_nearest():
    table = pk.generate_bin_table(8, seed=7)
    labels = pk.soft_labels(table.bins[2], table, 0.1, table.spacing)
    assert labels[2] == pytest.approx(1.0)
    assert len(labels) == 8


def test_translation_codec_roundtrip():
    table = pk.generate_translation_bins([-1, -1, 1], [1, 1, 3], [2, 2, 2])
    assert table.n == 8
    t = np.array([0.3, -0.4, 2.7])
    bin_index, delta, clamped = pk.encode_translation(t, table)
    assert not clamped
    assert np.allclose(pk.decode_translation(bin_index, delta, table), t, atol=1e-12)


def test_voxelize_and_binvox_roundtrip():
    mesh = pk.make_synthetic_shape("box", [1.0, 1.0, 1.0], seed=1)
    grid = pk.voxelize_mesh(mesh, 16)
    assert grid.occupied_count() > 0
    data = pk.write_binvox(grid)
    back = pk.read_binvox(data)
    assert np.array_equal(back.numpy(), grid.numpy())


def test_rotate_grid_identity():
    mesh = pk.make_synthetic_shape("lshape", [1.0, 1.0, 1.0], seed=2)
    grid = pk.voxelize_mesh(mesh, 16)
    same = pk.rotate_grid(grid, np.eye(3))
    assert np.array_equal(same.numpy(), grid.numpy())


def test_render_silhouette():
    mesh = pk.make_synthetic_shape("ellipsoid", [1.0, 1.0, 1.0], seed=3)
    image = pk.render_silhouette(mesh, np.eye(3), [0.0, 0.0, 3.0], 32, 2.5)
    image = np.asarray(image)
    assert image.shape == (32 * 32,)
    assert set(np.unique(image)) <= {0.0, 1.0}
    assert image.sum() > 0


def test_retrieval():
    db = pk.build_database([
        ("a", "box", np.array([0.0, 1.0])),
        ("b", "box", np.array([1.0, 0.0])),
    ])
    assert len(db) == 2
    shape_id, distance = pk.nearest_shape(np.array([0.9, 0.0]), db)
    assert shape_id == "b"
    assert distance == pytest.approx(0.1)


def test_med_err_deg():
    eye = np.eye(3)
    rz = pk.euler_to_rotation(0.0, 0.0, math.pi / 6)
    assert pk.med_err_deg([(eye, eye), (rz, eye), (rz, eye)]) == pytest.approx(30.0)


def test_error_taxonomy():
    with pytest.raises(Exception) as exc_info:
        pk.read_binvox(b"not a binvox stream")
    assert "PosekitError" in type(exc_info.value).__name__ or isinstance(
        exc_info.value, RuntimeError)
