import numpy as np
import pytest

from alphaforge import Mesh, face_normals, sample_surface
from alphaforge.errors import NoSurface

UNIT_SQUARE = Mesh(
    np.array([[0.0, 0, 0], [1.0, 0, 0], [1.0, 1, 0], [0.0, 1, 0]]),
    np.array([[0, 1, 2], [0, 2, 3]]),
)


def barycentric(p, a, b, c):
    v0, v1, v2 = b - a, c - a, p - a
    d00, d01, d11 = v0 @ v0, v0 @ v1, v1 @ v1
    d20, d21 = v2 @ v0, v2 @ v1
    denom = d00 * d11 - d01 * d01
    v = (d11 * d20 - d01 * d21) / denom
    w = (d00 * d21 - d01 * d20) / denom
    return 1.0 - v - w, v, w


def test_zero_samples_empty_cloud(single_triangle):
    cloud = sample_surface(single_triangle, 0, seed=1)
    assert len(cloud) == 0
    assert cloud.has_normals


def test_samples_lie_inside_triangle(single_triangle):
    cloud = sample_surface(single_triangle, 1000, seed=2)
    a, b, c = single_triangle.vertices
    for p in cloud.points:
        u, v, w = barycentric(p, a, b, c)
        assert min(u, v, w) > -1e-9


def test_two_triangle_split_is_even():
    # binomial bound: p=0.5, n=1e5, 6 sigma ~ 0.0095
    cloud = sample_surface(UNIT_SQUARE, 100_000, seed=3)
    in_first = (cloud.points[:, 0] >= cloud.points[:, 1]).mean()
    assert abs(in_first - 0.5) < 0.01


def test_density_uniform_on_grid():
    cloud = sample_surface(UNIT_SQUARE, 1_000_000, seed=4)
    ix = np.minimum((cloud.points[:, 0] * 10).astype(int), 9)
    iy = np.minimum((cloud.points[:, 1] * 10).astype(int), 9)
    counts = np.bincount(ix * 10 + iy, minlength=100)
    expected = len(cloud) / 100
    assert np.abs(counts - expected).max() < 0.05 * expected


def test_normals_are_unit_and_match_source_face(tetra_mesh):
    cloud = sample_surface(tetra_mesh, 500, seed=5)
    np.testing.assert_allclose(np.linalg.norm(cloud.normals, axis=1), 1.0,
                               atol=1e-12)
    fn = face_normals(tetra_mesh)
    match = np.abs(cloud.normals @ fn.T).max(axis=1)
    np.testing.assert_allclose(match, 1.0, atol=1e-9)


def test_deterministic(tetra_mesh):
    a = sample_surface(tetra_mesh, 257, seed=99)
    b = sample_surface(tetra_mesh, 257, seed=99)
    np.testing.assert_array_equal(a.points, b.points)
    np.testing.assert_array_equal(a.normals, b.normals)
    c = sample_surface(tetra_mesh, 257, seed=100)
    assert not np.array_equal(a.points, c.points)


def test_no_surface_raises():
    degenerate = Mesh(np.array([[0.0, 0, 0], [1e-9, 0, 0], [0.0, 1e-9, 0]]),
                      np.array([[0, 1, 2]]))
    with pytest.raises(NoSurface):
        sample_surface(degenerate, 10, seed=0)
