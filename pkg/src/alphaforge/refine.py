"""Baseline construction, Taubin smoothing, subdivision, and mesh refinement.

Refinement optimizes a bounded offset per vertex: stage vertices are
``v + tanh(o)`` with the offsets driven by plain gradient descent on the
total loss, so no vertex can move more than 1 along any axis within a
stage. The offsets are free variables rather than the output of a learned
network, which keeps the update rule's form while exercising every loss
gradient directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .alphashape import extract_boundary_faces, filter_tetrahedra, triangulate
from .delaunay import delaunay_complex
from .errors import ConfigError, EmptyMesh, NonFinite
from .loss import LossBreakdown, LossWeights, total_loss_with_grad
from .mesh import Mesh, PointCloud, unique_edges
from .sampling import sample_surface_with_faces

# tanh(OFFSET_CLIP) < 1 - 1e-12, keeping the displacement bound strict even
# if the optimizer drives an offset to saturation.
OFFSET_CLIP = 14.0
DISPLACEMENT_BOUND = 1.0 - 1e-12


@dataclass(frozen=True)
class TaubinConfig:
    """Alternating smooth/inflate passes: positive lam then negative
    mu_shrink, |mu_shrink| > lam, per iteration."""

    lam: float = 0.5
    mu_shrink: float = -0.53
    iterations: int = 10

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise ConfigError("lam must lie in (0, 1) exclusive")
        if self.mu_shrink >= 0 or abs(self.mu_shrink) <= self.lam:
            raise ConfigError("mu_shrink must be negative with |mu_shrink| > lam")
        if self.iterations < 0:
            raise ConfigError("iterations must be >= 0")


@dataclass(frozen=True)
class RefineConfig:
    stages: int = 2
    iters_per_stage: int = 100
    step_size: float = 1e-3
    weights: LossWeights = field(default_factory=LossWeights)
    subdivide_between_stages: bool = False

    def __post_init__(self):
        if self.stages < 1:
            raise ConfigError("stages must be >= 1")
        if self.iters_per_stage < 0:
            raise ConfigError("iters_per_stage must be >= 0")
        if self.step_size <= 0:
            raise ConfigError("step_size must be positive")


def _umbrella(vertices: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Uniform-weight umbrella operator: neighbor mean minus vertex
    (zero for isolated vertices)."""
    sums = np.zeros_like(vertices)
    deg = np.zeros(len(vertices))
    i, j = edges[:, 0], edges[:, 1]
    np.add.at(sums, i, vertices[j])
    np.add.at(sums, j, vertices[i])
    np.add.at(deg, i, 1.0)
    np.add.at(deg, j, 1.0)
    delta = np.zeros_like(vertices)
    has = deg > 0
    delta[has] = sums[has] / deg[has, None] - vertices[has]
    return delta


def taubin_smooth(mesh: Mesh, cfg: TaubinConfig) -> Mesh:
    """Shrink-resistant smoothing: per iteration apply the umbrella step with
    factor lam, then again with the negative factor mu_shrink. Connectivity
    is unchanged."""
    edges = unique_edges(mesh)
    v = mesh.vertices.copy()
    for _ in range(cfg.iterations):
        v = v + cfg.lam * _umbrella(v, edges)
        v = v + cfg.mu_shrink * _umbrella(v, edges)
    return mesh.with_vertices(v)


def build_baseline(points: PointCloud | np.ndarray, tau: float,
                   taubin: TaubinConfig) -> Mesh:
    """Regularization target: triangulate, Taubin-smooth the boundary mesh,
    then re-run the triangulation on the cloud with the smoothed positions.

    The re-triangulation sees the full input cloud with the boundary
    vertices moved to their smoothed locations. Re-triangulating only the
    boundary vertices would hand the filter a surface-distributed cloud,
    whose tangent tetrahedra carry curvature-scale circumradii; at any
    workable tau that collapses into disconnected shell fragments, so the
    full cloud keeps the interior support the filter needs.

    With zero smoothing iterations the first triangulation is returned
    unchanged. Raises EmptyMesh if either triangulation filters out every
    tetrahedron.
    """
    cloud = points if isinstance(points, PointCloud) else PointCloud(points)
    complex_ = delaunay_complex(cloud)
    kept = filter_tetrahedra(complex_, tau)
    if not kept:
        raise EmptyMesh(f"tau={tau} removed all tetrahedra")
    first, used = extract_boundary_faces(kept, complex_.points)
    if taubin.iterations == 0:
        return first
    smoothed = taubin_smooth(first, taubin)
    full = cloud.points.copy()
    full[used] = smoothed.vertices
    return triangulate(PointCloud(full), tau)


def subdivide(mesh: Mesh) -> Mesh:
    """Midpoint subdivision: one new vertex per unique edge, each face
    replaced by four. Meshes with identical connectivity subdivide to
    identical vertex indexing (edges are ranked lexicographically)."""
    edges = unique_edges(mesh)
    nv = mesh.num_vertices
    midpoints = 0.5 * (mesh.vertices[edges[:, 0]] + mesh.vertices[edges[:, 1]])
    edge_rank = {(int(i), int(j)): nv + r for r, (i, j) in enumerate(edges)}

    def mid(i: int, j: int) -> int:
        return edge_rank[(i, j) if i < j else (j, i)]

    new_faces = []
    for a, b, c in mesh.faces:
        a, b, c = int(a), int(b), int(c)
        mab, mbc, mca = mid(a, b), mid(b, c), mid(c, a)
        new_faces.extend([(a, mab, mca), (mab, b, mbc), (mca, mbc, c), (mab, mbc, mca)])
    vertices = np.concatenate([mesh.vertices, midpoints]) if len(edges) else mesh.vertices
    return Mesh(vertices, np.array(new_faces, dtype=np.int64).reshape(-1, 3))


def refine_mesh(
    initial: Mesh,
    gt_samples: PointCloud,
    baseline: Mesh | None,
    cfg: RefineConfig,
    seed: int = 0,
) -> tuple[Mesh, list[LossBreakdown]]:
    """Gradient-descent refinement of the mesh toward the target samples.

    Per stage, per-vertex offsets (initialized to zero) are optimized so the
    working vertices are ``v + tanh(o)``; offsets are baked in at the end of
    the stage. Face connectivity never changes within a stage; with
    ``subdivide_between_stages`` both mesh and baseline are midpoint
    subdivided between stages. The per-stage sampling seed is fixed, so each
    stage descends a deterministic objective. Returns the refined mesh and
    the per-iteration loss trace.

    Raises NonFinite when a loss or gradient stops being finite (step size
    too large for the geometry).
    """
    mesh = initial
    base = baseline
    n_samples = max(len(gt_samples), 1)
    needs_samples = (cfg.weights.lambda1 > 0 or cfg.weights.lambda2 > 0
                     or cfg.weights.lambda6 > 0)
    trace: list[LossBreakdown] = []
    for stage in range(cfg.stages):
        anchor = mesh.vertices
        offsets = np.zeros_like(anchor)
        stage_seed = seed + stage
        fixed = None
        if needs_samples and cfg.iters_per_stage:
            # freeze the stage's sampling map so the objective is continuous
            # in the offsets (samples ride their faces as vertices move)
            _, face_idx, bary = sample_surface_with_faces(mesh, n_samples, stage_seed)
            fixed = (face_idx, bary)
        for _ in range(cfg.iters_per_stage):
            disp = np.tanh(offsets)
            current = mesh.with_vertices(anchor + disp)
            breakdown, grad = total_loss_with_grad(
                current, gt_samples, base, cfg.weights, n_samples, stage_seed,
                fixed_sampling=fixed)
            if not math.isfinite(breakdown.total) or not np.isfinite(grad).all():
                raise NonFinite("loss or gradient became non-finite; reduce step_size")
            trace.append(breakdown)
            offsets -= cfg.step_size * grad * (1.0 - disp**2)
            np.clip(offsets, -OFFSET_CLIP, OFFSET_CLIP, out=offsets)
        disp = np.tanh(offsets)
        assert np.abs(disp).max(initial=0.0) < DISPLACEMENT_BOUND
        mesh = mesh.with_vertices(anchor + disp)
        if cfg.subdivide_between_stages and stage + 1 < cfg.stages:
            mesh = subdivide(mesh)
            if base is not None:
                base = subdivide(base)
    return mesh, trace


def trace_to_csv(trace: list[LossBreakdown]) -> str:
    """Loss trace as CSV (iteration, per-term values, total)."""
    lines = ["iteration,logcmd,cmd,laplacian_reg,edge_len,normal_consistency,"
             "normal_loss,total"]
    for i, b in enumerate(trace):
        lines.append(f"{i},{b.logcmd!r},{b.cmd!r},{b.laplacian_reg!r},"
                     f"{b.edge_len!r},{b.normal_consistency!r},{b.normal_loss!r},"
                     f"{b.total!r}")
    return "\n".join(lines) + "\n"
