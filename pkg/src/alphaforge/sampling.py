"""Area-uniform surface sampling of triangle meshes."""

from __future__ import annotations

import numpy as np

from .errors import NoSurface
from .mesh import Mesh, PointCloud, face_cross_products

# Sample-count conventions: policy rewards use 3000 points, metric protocols
# 10000 (reward count fixed by the evaluation setup, metric count a
# variance/runtime balance).
REWARD_SAMPLES = 3000
METRIC_SAMPLES = 10000

MIN_TOTAL_AREA = 1e-12


def sample_surface(mesh: Mesh, n: int, seed: int) -> PointCloud:
    """Draw n area-uniform points from the mesh surface.

    Faces are selected with probability proportional to area (binary search
    on the cumulative-area table) and positions within a face use the
    square-root barycentric map

        P = (1 - sqrt(r1)) A + sqrt(r1) (1 - r2) B + sqrt(r1) r2 C,

    which is uniform over the triangle. Each sample carries its source
    face's unit normal. The stream comes from a counter-based Philox
    generator, so results are reproducible for a fixed (mesh, n, seed).
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    cross = face_cross_products(mesh)
    areas = 0.5 * np.linalg.norm(cross, axis=1)
    total = areas.sum()
    if not len(mesh.faces) or total < MIN_TOTAL_AREA:
        raise NoSurface(f"total mesh area {total} below {MIN_TOTAL_AREA}")
    if n == 0:
        return PointCloud(np.zeros((0, 3)), np.zeros((0, 3)))
    face_idx, r1, r2 = _draw(areas, n, seed)
    return _realize(mesh, cross, areas, face_idx, r1, r2)


def _draw(areas: np.ndarray, n: int, seed: int):
    """Face indices and barycentric uniforms for n samples."""
    rng = np.random.Generator(np.random.Philox(seed))
    cumulative = np.cumsum(areas)
    u = rng.random(n) * cumulative[-1]
    face_idx = np.searchsorted(cumulative, u, side="right")
    face_idx = np.minimum(face_idx, len(areas) - 1)
    r1 = rng.random(n)
    r2 = rng.random(n)
    return face_idx, r1, r2


def _realize(mesh, cross, areas, face_idx, r1, r2) -> PointCloud:
    v = mesh.vertices
    f = mesh.faces[face_idx]
    s = np.sqrt(r1)[:, None]
    b0 = 1.0 - s
    b1 = s * (1.0 - r2[:, None])
    b2 = s * r2[:, None]
    pos = b0 * v[f[:, 0]] + b1 * v[f[:, 1]] + b2 * v[f[:, 2]]
    normals = cross[face_idx] / (2.0 * areas[face_idx])[:, None]
    # renormalize to keep the unit invariant tight after the division
    normals = normals / np.linalg.norm(normals, axis=1, keepdims=True)
    return PointCloud(pos, normals)


def sample_surface_with_faces(mesh: Mesh, n: int, seed: int):
    """Like sample_surface but also returns (face_idx, barycentric) arrays.

    Used by gradient code that must chain sample positions back to the
    vertices of their source faces (assignment and barycentric coordinates
    held fixed).
    """
    if n <= 0:
        raise ValueError("n must be >= 1")
    cross = face_cross_products(mesh)
    areas = 0.5 * np.linalg.norm(cross, axis=1)
    if not len(mesh.faces) or areas.sum() < MIN_TOTAL_AREA:
        raise NoSurface("mesh has no sampleable area")
    face_idx, r1, r2 = _draw(areas, n, seed)
    cloud = _realize(mesh, cross, areas, face_idx, r1, r2)
    s = np.sqrt(r1)
    bary = np.stack([1.0 - s, s * (1.0 - r2), s * r2], axis=1)
    return cloud, face_idx, bary
