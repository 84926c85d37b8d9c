import numpy as np
import pytest

from alphaforge import (
    SyntheticSpec,
    boundary_edges,
    enclosed_volume,
    euler_characteristic,
    face_normals,
    reference_mesh,
    synth,
)
from alphaforge.errors import ConfigError
from test_mesh import brute_force_euler


class TestSpecValidation:
    def test_unknown_shape(self):
        with pytest.raises(ConfigError):
            SyntheticSpec("cone")

    def test_torus_radii_ordering(self):
        with pytest.raises(ConfigError):
            SyntheticSpec("torus", minor_radius=1.2, major_radius=1.0)

    def test_negative_sigma(self):
        with pytest.raises(ConfigError):
            SyntheticSpec("sphere", sigma=-0.1)


class TestReferenceMeshes:
    def test_euler_characteristics(self):
        expected = {"sphere": 2, "torus": 0, "box": 2, "stacked": -2}
        for shape, chi in expected.items():
            mesh = reference_mesh(SyntheticSpec(shape))
            assert euler_characteristic(mesh) == chi, shape
            assert brute_force_euler(mesh) == chi, shape
            assert len(boundary_edges(mesh)) == 0, shape

    def test_outward_orientation_positive_volume(self):
        for shape in ("sphere", "torus", "box", "stacked"):
            assert enclosed_volume(reference_mesh(SyntheticSpec(shape))) > 0, shape

    def test_stacked_volume_matches_construction(self):
        mesh = reference_mesh(SyntheticSpec("stacked"))
        expected = 3.0 * 1.5 * 0.75 - 2 * (0.5 * 0.5 * 0.75)
        assert enclosed_volume(mesh) == pytest.approx(expected, rel=1e-12)


class TestSurfaceSampling:
    def test_sphere_points_on_unit_sphere(self):
        cloud, _ = synth(SyntheticSpec("sphere", n=1000, sigma=0.0, seed=1))
        radii = np.linalg.norm(cloud.points, axis=1)
        np.testing.assert_allclose(radii, 1.0, atol=1e-9)
        np.testing.assert_allclose(np.linalg.norm(cloud.normals, axis=1), 1.0,
                                   atol=1e-12)

    def test_torus_points_on_surface(self):
        spec = SyntheticSpec("torus", n=500, seed=2)
        cloud, _ = synth(spec)
        ring = np.sqrt(cloud.points[:, 0] ** 2 + cloud.points[:, 1] ** 2)
        tube = np.sqrt((ring - spec.major_radius) ** 2 + cloud.points[:, 2] ** 2)
        np.testing.assert_allclose(tube, spec.minor_radius, atol=1e-9)

    def test_noise_moves_along_normals(self):
        clean, _ = synth(SyntheticSpec("sphere", n=400, sigma=0.0, seed=3))
        noisy, _ = synth(SyntheticSpec("sphere", n=400, sigma=0.05, seed=3))
        delta = noisy.points - clean.points
        # offsets parallel to the (shared) normals
        cross = np.linalg.norm(np.cross(delta, clean.normals), axis=1)
        np.testing.assert_allclose(cross, 0.0, atol=1e-12)
        assert np.abs(delta).max() > 0

    def test_box_sample_normals_match_faces(self):
        cloud, ref = synth(SyntheticSpec("box", n=300, seed=4))
        fn = face_normals(ref)
        agree = np.abs(cloud.normals @ fn.T).max(axis=1)
        np.testing.assert_allclose(agree, 1.0, atol=1e-9)


class TestSolidSampling:
    def test_sphere_inside_ball(self):
        cloud, _ = synth(SyntheticSpec("sphere", n=800, fill="solid", seed=5))
        assert not cloud.has_normals
        assert np.linalg.norm(cloud.points, axis=1).max() <= 1.0 + 1e-12

    def test_torus_inside_tube(self):
        spec = SyntheticSpec("torus", n=800, fill="solid", seed=6)
        cloud, _ = synth(spec)
        ring = np.sqrt(cloud.points[:, 0] ** 2 + cloud.points[:, 1] ** 2)
        tube = np.sqrt((ring - spec.major_radius) ** 2 + cloud.points[:, 2] ** 2)
        assert tube.max() <= spec.minor_radius + 1e-12

    def test_stacked_avoids_holes(self):
        cloud, _ = synth(SyntheticSpec("stacked", n=800, fill="solid", seed=7))
        pts = cloud.points + np.array([3.0, 1.5, 0.75]) / 2
        for (hx0, hx1), (hy0, hy1) in (((0.5, 1.0), (0.5, 1.0)),
                                       ((2.0, 2.5), (0.5, 1.0))):
            inside = ((pts[:, 0] > hx0) & (pts[:, 0] < hx1)
                      & (pts[:, 1] > hy0) & (pts[:, 1] < hy1))
            assert not inside.any()

    def test_deterministic(self):
        a, _ = synth(SyntheticSpec("torus", n=300, fill="solid", seed=8))
        b, _ = synth(SyntheticSpec("torus", n=300, fill="solid", seed=8))
        np.testing.assert_array_equal(a.points, b.points)
        c, _ = synth(SyntheticSpec("torus", n=300, fill="solid", seed=9))
        assert not np.array_equal(a.points, c.points)
