"""3D Delaunay tetrahedralization with per-tetrahedron circumspheres."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay as _SciPyDelaunay
from scipy.spatial import QhullError

from .errors import DegenerateInput, DegenerateTetrahedron, TooFewPoints
from .mesh import PointCloud

# Affine-independence predicate: |det| of the edge matrix must exceed this
# factor times (max edge length)^3, else the quadruple is treated as coplanar.
ORIENTATION_TOL = 1e-12


@dataclass(frozen=True)
class Tetrahedron:
    """Four vertex indices plus the cached circumsphere."""

    v0: int
    v1: int
    v2: int
    v3: int
    circumcenter: np.ndarray
    circumradius: float

    @property
    def indices(self) -> tuple[int, int, int, int]:
        return (self.v0, self.v1, self.v2, self.v3)


@dataclass(frozen=True)
class DelaunayComplex:
    """Delaunay tetrahedralization of a point set.

    No input point lies strictly inside any tetrahedron's circumsphere
    (strictly: closer than circumradius * (1 - 1e-9)), and the union of
    tetrahedra triangulates the convex hull.
    """

    points: PointCloud
    tetrahedra: list[Tetrahedron]

    def __len__(self) -> int:
        return len(self.tetrahedra)


def circumsphere(p0, p1, p2, p3) -> tuple[np.ndarray, float]:
    """Circumcenter and circumradius of the tetrahedron (p0, p1, p2, p3).

    Solves the linear system expressing equidistance from the four points,
    in a frame translated to p0 for conditioning. Raises
    DegenerateTetrahedron for (near-)coplanar quadruples.
    """
    p0 = np.asarray(p0, dtype=np.float64)
    A = np.stack([np.asarray(p, dtype=np.float64) - p0 for p in (p1, p2, p3)])
    scale = np.linalg.norm(A, axis=1).max()
    if scale == 0.0 or abs(np.linalg.det(A)) <= ORIENTATION_TOL * scale**3:
        raise DegenerateTetrahedron("coplanar quadruple: circumsphere undefined")
    b = 0.5 * np.einsum("ij,ij->i", A, A)
    local = np.linalg.solve(A, b)
    return p0 + local, float(np.linalg.norm(local))


def _batch_circumspheres(pts: np.ndarray, simplices: np.ndarray):
    """Vectorized circumspheres; returns (centers, radii, valid_mask)."""
    p0 = pts[simplices[:, 0]]
    A = pts[simplices[:, 1:]] - p0[:, None, :]
    scale = np.linalg.norm(A, axis=2).max(axis=1)
    det = np.linalg.det(A)
    ok = np.abs(det) > ORIENTATION_TOL * scale**3
    centers = np.full((len(simplices), 3), np.nan)
    radii = np.full(len(simplices), np.nan)
    if ok.any():
        b = 0.5 * np.einsum("tij,tij->ti", A[ok], A[ok])
        local = np.linalg.solve(A[ok], b[..., None])[..., 0]
        centers[ok] = p0[ok] + local
        radii[ok] = np.linalg.norm(local, axis=1)
    return centers, radii, ok


def _spread_quadruple_determinant(pts: np.ndarray) -> float:
    """|det| of the best-spread quadruple, relative to its edge scale.

    Greedy: farthest point from the first, then farthest from that line,
    then farthest from that plane. Returns 0 for flat inputs.
    """
    a = pts[0]
    d = np.linalg.norm(pts - a, axis=1)
    b = pts[np.argmax(d)]
    ab = b - a
    nab = np.linalg.norm(ab)
    if nab == 0.0:
        return 0.0
    cross = np.cross(pts - a, ab)
    c = pts[np.argmax(np.linalg.norm(cross, axis=1))]
    n = np.cross(ab, c - a)
    nn = np.linalg.norm(n)
    if nn == 0.0:
        return 0.0
    h = np.abs((pts - a) @ n) / nn
    dpt = pts[np.argmax(h)]
    A = np.stack([b - a, c - a, dpt - a])
    scale = np.linalg.norm(A, axis=1).max()
    return abs(np.linalg.det(A)) / scale**3


def delaunay_complex(points: PointCloud | np.ndarray) -> DelaunayComplex:
    """Delaunay tetrahedralization of the cloud (normals ignored).

    Deterministic for a fixed input ordering. Simplices failing the
    affine-independence predicate (flat slivers from cospherical tie-breaking)
    carry no defined circumsphere and are dropped; they have zero volume
    within tolerance, so the hull-volume identity is unaffected.

    Raises TooFewPoints (< 4 points) or DegenerateInput (all coplanar).
    """
    cloud = points if isinstance(points, PointCloud) else PointCloud(points)
    pts = cloud.points
    if len(pts) < 4:
        raise TooFewPoints(f"need at least 4 points, got {len(pts)}")
    if _spread_quadruple_determinant(pts) <= ORIENTATION_TOL:
        raise DegenerateInput("all points coplanar within predicate tolerance")
    try:
        tri = _SciPyDelaunay(pts)
    except QhullError as exc:  # pragma: no cover - pre-checks catch the common cases
        raise DegenerateInput(f"tetrahedralization failed: {exc}") from exc
    simplices = np.sort(tri.simplices, axis=1)
    order = np.lexsort(simplices.T[::-1])
    simplices = simplices[order]
    centers, radii, ok = _batch_circumspheres(pts, simplices)
    tets = [
        Tetrahedron(int(s[0]), int(s[1]), int(s[2]), int(s[3]), centers[i], float(radii[i]))
        for i, s in enumerate(simplices)
        if ok[i]
    ]
    return DelaunayComplex(points=cloud, tetrahedra=tets)
