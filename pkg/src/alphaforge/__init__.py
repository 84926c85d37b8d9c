"""alphaforge: point-cloud-to-mesh reconstruction toolkit.

Pipeline: Delaunay tetrahedralization, circumradius filtering with a fixed
or learned threshold, boundary extraction, Taubin-smoothed baseline
construction, and gradient-based refinement under a Chamfer/regularizer
loss suite, plus the standard evaluation protocols.
"""

from . import errors
from .alphashape import (
    PRETTY_TAUS,
    SMOOTH_TAUS,
    TAU_PRESETS,
    extract_boundary_faces,
    filter_tetrahedra,
    triangulate,
)
from .delaunay import DelaunayComplex, Tetrahedron, circumsphere, delaunay_complex
from .loss import (
    LossBreakdown,
    LossWeights,
    chamfer,
    chamfer_grad,
    edge_length_reg,
    laplacian_coords,
    laplacian_reg,
    log_chamfer,
    log_chamfer_grad,
    normal_consistency,
    normal_loss,
    pretty_weights,
    smooth_weights,
    total_loss,
    total_loss_grad,
    total_loss_with_grad,
)
from .mesh import (
    Mesh,
    PointCloud,
    boundary_edges,
    enclosed_volume,
    euler_characteristic,
    face_areas,
    face_normals,
    unique_edges,
)
from .meshio import read_mesh, read_points, write_mesh, write_points
from .metrics import (
    EvalReport,
    RigidTransform,
    apply_protocol_scaling,
    evaluate,
    f1_score,
    icp_align,
    normal_cosine,
)
from .policy import (
    QPolicy,
    TrainLog,
    load_policy,
    q_values,
    reward,
    save_policy,
    select_action,
    state_descriptor,
    train_policy,
    update,
)
from .refine import (
    RefineConfig,
    TaubinConfig,
    build_baseline,
    refine_mesh,
    subdivide,
    taubin_smooth,
    trace_to_csv,
)
from .sampling import METRIC_SAMPLES, REWARD_SAMPLES, sample_surface
from .synth import SyntheticSpec, icosphere, reference_mesh, synth

__version__ = "0.1.0"

__all__ = [
    "DelaunayComplex", "EvalReport", "LossBreakdown", "LossWeights", "Mesh",
    "METRIC_SAMPLES", "PRETTY_TAUS", "PointCloud", "QPolicy", "REWARD_SAMPLES",
    "RefineConfig", "RigidTransform", "SMOOTH_TAUS", "SyntheticSpec",
    "TAU_PRESETS", "TaubinConfig", "Tetrahedron", "TrainLog",
    "apply_protocol_scaling", "boundary_edges", "build_baseline", "chamfer",
    "chamfer_grad", "circumsphere", "delaunay_complex", "edge_length_reg",
    "enclosed_volume", "errors", "euler_characteristic", "evaluate",
    "extract_boundary_faces", "f1_score", "face_areas", "face_normals",
    "filter_tetrahedra", "icosphere", "icp_align", "laplacian_coords",
    "laplacian_reg", "load_policy", "log_chamfer", "log_chamfer_grad",
    "normal_consistency", "normal_cosine", "normal_loss", "pretty_weights",
    "q_values", "read_mesh", "read_points", "reference_mesh", "refine_mesh",
    "reward", "sample_surface", "save_policy", "select_action",
    "smooth_weights", "state_descriptor", "subdivide", "synth",
    "taubin_smooth", "total_loss", "total_loss_grad", "total_loss_with_grad",
    "trace_to_csv", "train_policy", "triangulate", "unique_edges", "update",
    "write_mesh", "write_points",
]
