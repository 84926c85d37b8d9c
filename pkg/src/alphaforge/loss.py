"""Loss suite for mesh fitting: Chamfer terms, Laplacian and normal
regularizers, edge-length penalty, and their analytic vertex gradients.

Every term comes in a (value, gradient) pair whose gradient is validated
against central finite differences in the test suite. Nearest-neighbor
assignments are held fixed when differentiating (subgradient at ties,
lowest index winning).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    EmptyCloud,
    IsolatedVertex,
    MissingNormals,
    NoEdges,
    VertexCountMismatch,
)
from .mesh import Mesh, PointCloud, face_cross_products, unique_edges
from .sampling import sample_surface_with_faces

LN10 = math.log(10.0)
COT_CLAMP = 50.0
BRUTE_FORCE_LIMIT = 64


@dataclass(frozen=True)
class LossWeights:
    """Term weights for the total loss, plus the log-Chamfer offset mu and
    the reward radius nu."""

    lambda1: float = 1.0
    lambda2: float = 1.0
    lambda3: float = 0.0
    lambda4: float = 0.0
    lambda5: float = 0.0
    lambda6: float = 0.0
    mu: float = 1e-4
    nu: float = 1e-4

    def __post_init__(self):
        lams = (self.lambda1, self.lambda2, self.lambda3,
                self.lambda4, self.lambda5, self.lambda6)
        if any(not math.isfinite(l) or l < 0 for l in lams):
            raise ValueError("loss weights must be finite and >= 0")
        if self.mu <= 0 or self.nu <= 0:
            raise ValueError("mu and nu must be positive")


def smooth_weights() -> LossWeights:
    """Weight preset of the fully regularized training recipe."""
    return LossWeights(lambda1=1.0, lambda2=1.0, lambda3=0.5,
                       lambda4=0.15, lambda5=1e-3, lambda6=1e-4)


def pretty_weights() -> LossWeights:
    """Weight preset with only data and edge-length terms active."""
    return LossWeights(lambda1=1.0, lambda2=1.0, lambda3=0.0,
                       lambda4=0.2, lambda5=0.0, lambda6=0.0)


@dataclass(frozen=True)
class LossBreakdown:
    logcmd: float
    cmd: float
    laplacian_reg: float
    edge_len: float
    normal_consistency: float
    normal_loss: float
    total: float


def nearest_neighbors(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Index into b of the nearest neighbor for each row of a, plus squared
    distances. Exact; brute force below 64 target points (ties resolved to
    the lowest index), kd-tree above."""
    if len(b) < BRUTE_FORCE_LIMIT:
        d2 = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
        idx = np.argmin(d2, axis=1)
        return idx, d2[np.arange(len(a)), idx]
    dist, idx = cKDTree(b).query(a, k=1)
    return idx, dist**2


def _require_cloud(cloud: PointCloud, name: str) -> None:
    if len(cloud) == 0:
        raise EmptyCloud(f"{name} is empty")


def chamfer(p: PointCloud, q: PointCloud) -> float:
    """Symmetric mean of nearest-neighbor squared distances (both directions)."""
    _require_cloud(p, "P")
    _require_cloud(q, "Q")
    _, d2_pq = nearest_neighbors(p.points, q.points)
    _, d2_qp = nearest_neighbors(q.points, p.points)
    return float(d2_pq.mean() + d2_qp.mean())


def chamfer_grad(p: PointCloud, q: PointCloud) -> np.ndarray:
    """d(chamfer)/dp for every point of P, assignments held fixed."""
    _require_cloud(p, "P")
    _require_cloud(q, "Q")
    pp, qq = p.points, q.points
    idx_pq, _ = nearest_neighbors(pp, qq)
    idx_qp, _ = nearest_neighbors(qq, pp)
    grad = (2.0 / len(pp)) * (pp - qq[idx_pq])
    np.add.at(grad, idx_qp, (2.0 / len(qq)) * (pp[idx_qp] - qq))
    return grad


def log_chamfer(p: PointCloud, q: PointCloud, mu: float) -> float:
    """Sum (not mean) over both directions of log10(min squared dist + mu)."""
    _require_cloud(p, "P")
    _require_cloud(q, "Q")
    if mu <= 0:
        raise ValueError("mu must be positive")
    _, d2_pq = nearest_neighbors(p.points, q.points)
    _, d2_qp = nearest_neighbors(q.points, p.points)
    return float(np.log10(d2_pq + mu).sum() + np.log10(d2_qp + mu).sum())


def log_chamfer_grad(p: PointCloud, q: PointCloud, mu: float) -> np.ndarray:
    """d(log_chamfer)/dp; per matched pair 2(p-q) / ((|p-q|^2 + mu) ln 10)."""
    _require_cloud(p, "P")
    _require_cloud(q, "Q")
    if mu <= 0:
        raise ValueError("mu must be positive")
    pp, qq = p.points, q.points
    idx_pq, d2_pq = nearest_neighbors(pp, qq)
    idx_qp, d2_qp = nearest_neighbors(qq, pp)
    grad = 2.0 * (pp - qq[idx_pq]) / ((d2_pq + mu) * LN10)[:, None]
    np.add.at(grad, idx_qp, 2.0 * (pp[idx_qp] - qq) / ((d2_qp + mu) * LN10)[:, None])
    return grad


# ---------------------------------------------------------------------------
# Cotangent Laplacian


def _cotangent_edge_data(mesh: Mesh):
    """Per unique edge: endpoints, clamped weight, and the (edge slot -> face
    corner) bookkeeping needed to differentiate the cotangents.

    Returns (edges, weights, clamped_mask, slot_edge, slot_i, slot_j, slot_k)
    where each slot is one angle opposite one edge in one face.
    """
    f = mesh.faces
    # edge (i, j) opposite corner k, three slots per face
    slot_i = np.concatenate([f[:, 1], f[:, 2], f[:, 0]])
    slot_j = np.concatenate([f[:, 2], f[:, 0], f[:, 1]])
    slot_k = np.concatenate([f[:, 0], f[:, 1], f[:, 2]])
    key = np.sort(np.stack([slot_i, slot_j], axis=1), axis=1)
    edges, inverse = np.unique(key, axis=0, return_inverse=True)

    v = mesh.vertices
    u = v[slot_i] - v[slot_k]
    w = v[slot_j] - v[slot_k]
    cross = np.cross(u, w)
    s = np.linalg.norm(cross, axis=1)
    s = np.maximum(s, 1e-300)  # degenerate corners produce huge cots, clamped below
    cot = np.einsum("ij,ij->i", u, w) / s

    raw = np.zeros(len(edges))
    np.add.at(raw, inverse, 0.5 * cot)
    weights = np.clip(raw, -COT_CLAMP, COT_CLAMP)
    clamped = raw != weights
    return edges, weights, clamped, inverse, slot_i, slot_j, slot_k


def _laplacian_from_edges(mesh: Mesh, edges: np.ndarray, weights: np.ndarray) -> np.ndarray:
    v = mesh.vertices
    lo = np.zeros_like(v)
    i, j = edges[:, 0], edges[:, 1]
    wd = weights[:, None] * (v[i] - v[j])
    np.add.at(lo, i, wd)
    np.add.at(lo, j, -wd)
    return lo


def laplacian_coords(mesh: Mesh) -> np.ndarray:
    """Cotangent-weighted Laplacian coordinate of every vertex.

    LO(i) = sum over neighbors j of w_ij (v_i - v_j), with
    w_ij = (cot a_ij + cot b_ij) / 2 over the angles opposite edge (i, j)
    (a single angle on boundary edges), clamped to [-50, 50].

    Raises IsolatedVertex when some vertex has no incident face.
    """
    incident = np.zeros(mesh.num_vertices, dtype=bool)
    if len(mesh.faces):
        incident[np.unique(mesh.faces)] = True
    if not incident.all():
        missing = int(np.flatnonzero(~incident)[0])
        raise IsolatedVertex(f"vertex {missing} has no incident face")
    edges, weights, _, _, _, _, _ = _cotangent_edge_data(mesh)
    return _laplacian_from_edges(mesh, edges, weights)


def laplacian_reg(m: Mesh, m_t: Mesh) -> float:
    """Mean squared difference of the two meshes' Laplacian coordinates.

    Each mesh uses its own connectivity and cotangent weights; vertex
    indices must correspond.
    """
    if m.num_vertices != m_t.num_vertices:
        raise VertexCountMismatch(
            f"{m.num_vertices} != {m_t.num_vertices} vertices")
    diff = laplacian_coords(m) - laplacian_coords(m_t)
    return float((diff**2).sum(axis=1).mean())


def _laplacian_reg_and_grad(m: Mesh, lo_target: np.ndarray):
    """Value and d/d(vertices of m) of mean_i |LO_m(i) - lo_target(i)|^2."""
    edges, weights, clamped, inverse, si, sj, sk = _cotangent_edge_data(m)
    lo = _laplacian_from_edges(m, edges, weights)
    g = lo - lo_target
    nv = m.num_vertices
    value = float((g**2).sum(axis=1).mean())

    grad = np.zeros_like(m.vertices)
    v = m.vertices
    i, j = edges[:, 0], edges[:, 1]
    # position part: LO(i) depends on v_i and its neighbors
    coeff = (2.0 / nv) * weights[:, None]
    gi_gj = g[i] - g[j]
    np.add.at(grad, i, coeff * gi_gj)
    np.add.at(grad, j, -coeff * gi_gj)

    # weight part: c_e = (2/V) (g_i - g_j) . (v_i - v_j), zero where clamped
    c_e = (2.0 / nv) * np.einsum("ij,ij->i", gi_gj, v[i] - v[j])
    c_e = np.where(clamped, 0.0, c_e)
    c_slot = 0.5 * c_e[inverse]  # each cot enters w_e with factor 1/2

    u = v[si] - v[sk]
    w = v[sj] - v[sk]
    cross = np.cross(u, w)
    s = np.maximum(np.linalg.norm(cross, axis=1), 1e-300)
    d = np.einsum("ij,ij->i", u, w)
    s1 = s[:, None]
    ds3 = (d / s**3)[:, None]
    dcot_du = w / s1 - ds3 * np.cross(w, cross)
    dcot_dw = u / s1 - ds3 * np.cross(cross, u)
    np.add.at(grad, si, c_slot[:, None] * dcot_du)
    np.add.at(grad, sj, c_slot[:, None] * dcot_dw)
    np.add.at(grad, sk, -c_slot[:, None] * (dcot_du + dcot_dw))
    return value, grad


# ---------------------------------------------------------------------------
# Normal terms


def _adjacent_face_pairs(mesh: Mesh) -> np.ndarray:
    """Unordered pairs of faces sharing an edge, as an (m, 2) array."""
    f = mesh.faces
    if not len(f):
        return np.zeros((0, 2), dtype=np.int64)
    e = np.sort(np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]]), axis=1)
    face_of = np.tile(np.arange(len(f)), 3)
    order = np.lexsort((e[:, 1], e[:, 0]))
    e, face_of = e[order], face_of[order]
    boundary = np.flatnonzero(np.any(e[1:] != e[:-1], axis=1))
    starts = np.concatenate([[0], boundary + 1, [len(e)]])
    pairs = []
    for s, t in zip(starts[:-1], starts[1:]):
        group = face_of[s:t]
        if len(group) > 1:
            for x in range(len(group)):
                for y in range(x + 1, len(group)):
                    pairs.append((group[x], group[y]))
    if not pairs:
        return np.zeros((0, 2), dtype=np.int64)
    return np.unique(np.sort(np.array(pairs, dtype=np.int64), axis=1), axis=0)


def normal_consistency(m: Mesh) -> float:
    """Sum over adjacent face pairs of 1 - cos(n1, n2); 0 when no pairs."""
    value, _ = _normal_consistency_and_grad(m, want_grad=False)
    return value


def _face_unit_normals(mesh: Mesh):
    cross = face_cross_products(mesh)
    s = np.maximum(np.linalg.norm(cross, axis=1), 1e-300)
    return cross / s[:, None], s


def _scatter_normal_grad(mesh: Mesh, grad_n: np.ndarray, n: np.ndarray, s: np.ndarray):
    """Chain per-face gradients w.r.t. unit normals back to vertices."""
    big_g = (grad_n - n * np.einsum("ij,ij->i", n, grad_n)[:, None]) / s[:, None]
    v = mesh.vertices
    f = mesh.faces
    a, b, c = v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]
    grad = np.zeros_like(v)
    np.add.at(grad, f[:, 0], np.cross(b - c, big_g))
    np.add.at(grad, f[:, 1], np.cross(c - a, big_g))
    np.add.at(grad, f[:, 2], np.cross(a - b, big_g))
    return grad


def _normal_consistency_and_grad(m: Mesh, want_grad: bool = True):
    pairs = _adjacent_face_pairs(m)
    if not len(pairs):
        return 0.0, np.zeros_like(m.vertices)
    n, s = _face_unit_normals(m)
    n1, n2 = n[pairs[:, 0]], n[pairs[:, 1]]
    value = float((1.0 - np.einsum("ij,ij->i", n1, n2)).sum())
    if not want_grad:
        return value, None
    grad_n = np.zeros_like(n)
    np.add.at(grad_n, pairs[:, 0], -n2)
    np.add.at(grad_n, pairs[:, 1], -n1)
    return value, _scatter_normal_grad(m, grad_n, n, s)


def normal_loss(p: PointCloud, q: PointCloud) -> float:
    """Mean over both-direction nearest-neighbor matches of 1 - |cos| of the
    matched normals; 0 means perfectly aligned (orientation ignored)."""
    value, _, _ = _normal_loss_matches(p, q)
    return value


def _normal_loss_matches(p: PointCloud, q: PointCloud):
    _require_cloud(p, "P")
    _require_cloud(q, "Q")
    if not p.has_normals or not q.has_normals:
        raise MissingNormals("normal loss needs normals on both clouds")
    idx_pq, _ = nearest_neighbors(p.points, q.points)
    idx_qp, _ = nearest_neighbors(q.points, p.points)
    cos_fwd = np.einsum("ij,ij->i", p.normals, q.normals[idx_pq])
    cos_rev = np.einsum("ij,ij->i", p.normals[idx_qp], q.normals)
    total = (1.0 - np.abs(cos_fwd)).sum() + (1.0 - np.abs(cos_rev)).sum()
    value = float(total / (len(p) + len(q)))
    return value, (idx_pq, cos_fwd), (idx_qp, cos_rev)


def edge_length_reg(m: Mesh) -> float:
    """Mean squared length over the mesh's unique edges."""
    value, _ = _edge_length_and_grad(m, want_grad=False)
    return value


def _edge_length_and_grad(m: Mesh, want_grad: bool = True):
    edges = unique_edges(m)
    if not len(edges):
        raise NoEdges("mesh has no edges")
    v = m.vertices
    d = v[edges[:, 0]] - v[edges[:, 1]]
    value = float((d**2).sum(axis=1).mean())
    if not want_grad:
        return value, None
    grad = np.zeros_like(v)
    scale = 2.0 / len(edges)
    np.add.at(grad, edges[:, 0], scale * d)
    np.add.at(grad, edges[:, 1], -scale * d)
    return value, grad


# ---------------------------------------------------------------------------
# Total loss


def total_loss(
    m: Mesh,
    p_gt: PointCloud,
    m_t: Mesh | None,
    w: LossWeights,
    n_samples: int,
    seed: int,
) -> LossBreakdown:
    """Weighted sum of every active term; zero-weight terms are skipped and
    their preconditions waived. Data terms compare an n_samples surface
    sampling of m (deterministic in seed) against p_gt."""
    breakdown, _ = _total_loss_impl(m, p_gt, m_t, w, n_samples, seed, want_grad=False)
    return breakdown


def total_loss_grad(
    m: Mesh,
    p_gt: PointCloud,
    m_t: Mesh | None,
    w: LossWeights,
    n_samples: int,
    seed: int,
) -> np.ndarray:
    """Analytic d(total)/d(vertex) for every vertex of m.

    Sample positions are chained through the barycentric sampling map with
    face assignments, barycentric coordinates, and nearest-neighbor matches
    held fixed; the normal-loss term is chained through the face normals.
    """
    _, grad = _total_loss_impl(m, p_gt, m_t, w, n_samples, seed, want_grad=True)
    return grad


def total_loss_with_grad(
    m: Mesh,
    p_gt: PointCloud,
    m_t: Mesh | None,
    w: LossWeights,
    n_samples: int,
    seed: int,
    fixed_sampling: tuple[np.ndarray, np.ndarray] | None = None,
) -> tuple[LossBreakdown, np.ndarray]:
    """Breakdown and gradient in one pass (used by the refinement loop).

    ``fixed_sampling`` = (face_idx, barycentric) freezes the sampling map so
    successive evaluations form a continuous objective in the vertices;
    without it each call redraws samples from the current face areas.
    """
    return _total_loss_impl(m, p_gt, m_t, w, n_samples, seed, want_grad=True,
                            fixed_sampling=fixed_sampling)


def _realize_fixed_samples(m: Mesh, face_idx: np.ndarray,
                           bary: np.ndarray) -> PointCloud:
    v = m.vertices
    f = m.faces[face_idx]
    pos = (bary[:, 0, None] * v[f[:, 0]] + bary[:, 1, None] * v[f[:, 1]]
           + bary[:, 2, None] * v[f[:, 2]])
    cross = face_cross_products(m)[face_idx]
    s = np.maximum(np.linalg.norm(cross, axis=1), 1e-300)
    return PointCloud(pos, cross / s[:, None])


def _total_loss_impl(m, p_gt, m_t, w, n_samples, seed, want_grad,
                     fixed_sampling=None):
    needs_samples = w.lambda1 > 0 or w.lambda2 > 0 or w.lambda6 > 0
    grad = np.zeros_like(m.vertices)
    logcmd = cmd = lap = el = nc = nl = 0.0

    if needs_samples:
        if fixed_sampling is not None:
            # sampling map (face assignment + barycentric coordinates) frozen
            # by the caller: positions and normals follow the current mesh
            face_idx, bary = fixed_sampling
            samples = _realize_fixed_samples(m, face_idx, bary)
        else:
            if n_samples < 1:
                raise ValueError("n_samples must be >= 1")
            samples, face_idx, bary = sample_surface_with_faces(m, n_samples, seed)

        def chain_to_vertices(grad_pts):
            faces = m.faces[face_idx]
            for corner in range(3):
                np.add.at(grad, faces[:, corner], bary[:, corner, None] * grad_pts)

        if w.lambda1 > 0:
            logcmd = log_chamfer(samples, p_gt, w.mu)
            if want_grad:
                chain_to_vertices(w.lambda1 * log_chamfer_grad(samples, p_gt, w.mu))
        if w.lambda2 > 0:
            cmd = chamfer(samples, p_gt)
            if want_grad:
                chain_to_vertices(w.lambda2 * chamfer_grad(samples, p_gt))
        if w.lambda6 > 0:
            nl, fwd, rev = _normal_loss_matches(samples, p_gt)
            if want_grad:
                grad += w.lambda6 * _normal_loss_vertex_grad(
                    m, face_idx, p_gt, fwd, rev, len(samples))

    if w.lambda3 > 0:
        if m_t is None:
            raise VertexCountMismatch("laplacian term requires a baseline mesh")
        if m.num_vertices != m_t.num_vertices:
            raise VertexCountMismatch(
                f"{m.num_vertices} != {m_t.num_vertices} vertices")
        lo_target = laplacian_coords(m_t)
        if want_grad:
            lap, lap_grad = _laplacian_reg_and_grad(m, lo_target)
            grad += w.lambda3 * lap_grad
        else:
            lap = float(((laplacian_coords(m) - lo_target) ** 2).sum(axis=1).mean())
    if w.lambda4 > 0:
        el, el_grad = _edge_length_and_grad(m, want_grad)
        if want_grad:
            grad += w.lambda4 * el_grad
    if w.lambda5 > 0:
        nc, nc_grad = _normal_consistency_and_grad(m, want_grad)
        if want_grad:
            grad += w.lambda5 * nc_grad

    total = (w.lambda1 * logcmd + w.lambda2 * cmd + w.lambda3 * lap
             + w.lambda4 * el + w.lambda5 * nc + w.lambda6 * nl)
    breakdown = LossBreakdown(
        logcmd=logcmd, cmd=cmd, laplacian_reg=lap, edge_len=el,
        normal_consistency=nc, normal_loss=nl, total=float(total))
    return breakdown, grad


def _normal_loss_vertex_grad(m, face_idx, p_gt, fwd, rev, n_p):
    """Vertex gradient of the pooled 1 - |cos| normal term: accumulate
    d/d(face normal) over every match touching a sample of that face, then
    chain through the unit-normal map."""
    idx_pq, cos_fwd = fwd
    idx_qp, cos_rev = rev
    n, s = _face_unit_normals(m)
    denom = n_p + len(p_gt)
    grad_n = np.zeros_like(n)
    gt_n = p_gt.normals
    np.add.at(grad_n, face_idx,
              -np.sign(cos_fwd)[:, None] * gt_n[idx_pq] / denom)
    np.add.at(grad_n, face_idx[idx_qp],
              -np.sign(cos_rev)[:, None] * gt_n / denom)
    return _scatter_normal_grad(m, grad_n, n, s)
