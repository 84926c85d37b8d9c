"""Alpha-shape triangulation: circumradius filtering and boundary extraction.

The reconstruction pipeline builds the Delaunay complex of a cloud, deletes
every tetrahedron whose circumradius exceeds a threshold tau, and keeps the
faces incident to exactly one surviving tetrahedron. Interior walls (faces
shared by two kept tetrahedra) are discarded, so the result is the boundary
surface of the filtered solid.
"""

from __future__ import annotations

import numpy as np

from .delaunay import DelaunayComplex, Tetrahedron, delaunay_complex
from .errors import EmptyMesh, EmptySelection
from .mesh import Mesh, PointCloud

# Threshold presets (filtering action sets). "smooth" is the 3-action set,
# "pretty" the wide 24-action ladder restricted to its positive entries.
SMOOTH_TAUS: tuple[float, ...] = (0.05, 0.085, 0.11)
PRETTY_TAUS: tuple[float, ...] = tuple(
    round(0.15 + i / 50, 6) for i in range(-12, 12) if 0.15 + i / 50 > 0
)

TAU_PRESETS: dict[str, tuple[float, ...]] = {
    "smooth": SMOOTH_TAUS,
    "pretty": PRETTY_TAUS,
}

# Per-tetrahedron faces, each paired with the index of the opposite vertex.
_FACE_SLOTS = ((1, 2, 3, 0), (0, 2, 3, 1), (0, 1, 3, 2), (0, 1, 2, 3))


def filter_tetrahedra(complex_: DelaunayComplex, tau: float) -> list[Tetrahedron]:
    """Tetrahedra with circumradius <= tau, input order preserved."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    return [t for t in complex_.tetrahedra if t.circumradius <= tau]


def extract_boundary_faces(
    tets: list[Tetrahedron], points: PointCloud
) -> tuple[Mesh, np.ndarray]:
    """Boundary mesh of a tetrahedron set, plus the vertex index remap.

    Keeps faces whose unordered index triple appears in exactly one
    tetrahedron, oriented so each face normal points away from its
    tetrahedron's fourth vertex. Output vertices are re-indexed to those
    referenced; the second return value maps new index -> original index.
    """
    if not tets:
        raise EmptySelection("no tetrahedra to extract faces from")
    quads = np.array([t.indices for t in tets], dtype=np.int64)
    faces = []
    opposite = []
    for ia, ib, ic, iop in _FACE_SLOTS:
        faces.append(quads[:, [ia, ib, ic]])
        opposite.append(quads[:, iop])
    faces = np.concatenate(faces)
    opposite = np.concatenate(opposite)
    key = np.sort(faces, axis=1)
    _, first, counts = np.unique(key, axis=0, return_index=True, return_counts=True)
    boundary_idx = np.sort(first[counts == 1])
    bfaces = faces[boundary_idx]
    bopp = opposite[boundary_idx]

    pts = points.points
    a, b, c = pts[bfaces[:, 0]], pts[bfaces[:, 1]], pts[bfaces[:, 2]]
    outward = np.einsum("ij,ij->i", np.cross(b - a, c - a), pts[bopp] - a)
    flip = outward > 0
    bfaces[flip] = bfaces[flip][:, [0, 2, 1]]

    used = np.unique(bfaces)
    remap = np.full(len(pts), -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    return Mesh(pts[used], remap[bfaces]), used


def triangulate(points: PointCloud | np.ndarray, tau: float) -> Mesh:
    """Full triangulation layer: Delaunay complex, tau filter, boundary mesh.

    Raises EmptyMesh when filtering removes every tetrahedron, i.e. tau is
    too small for this cloud; the caller decides how to recover.
    """
    complex_ = delaunay_complex(points)
    kept = filter_tetrahedra(complex_, tau)
    if not kept:
        raise EmptyMesh(f"tau={tau} removed all {len(complex_)} tetrahedra")
    mesh, _ = extract_boundary_faces(kept, complex_.points)
    return mesh
