"""Dual quaternion formation control of rigid bodies over directed graphs."""

from dqform.control import SimConfig, Trajectory, error_curve, limit_transform, simulate, step
from dqform.dq_algebra import (
    DualNumber,
    DualQuaternion,
    Pose,
    Quaternion,
    UnitDualQuaternion,
    dq_mul,
    dq_vec_norm,
    make_pose,
    norm_2R,
    pose_parts,
    project_udq,
    quat_mul,
    random_udq,
)
from dqform.feasibility import RepairResult, nearest_feasible, quat_lstsq
from dqform.graph_topology import (
    DiGraph,
    gen_cycle,
    gen_grid,
    gen_star,
    has_simple_zero,
    make_topology,
    underlying_laplacian,
)
from dqform.spectral import eigenvalues, jordan_exp_bound, lambda2r, theory_rate
from dqform.udqdg import (
    Formation,
    Scheme,
    build_dq_laplacian,
    desired_formation,
    perturb_scheme,
    relative_scheme,
    verify_reasonable,
)

__all__ = [
    "SimConfig",
    "Trajectory",
    "error_curve",
    "limit_transform",
    "simulate",
    "step",
    "DualNumber",
    "DualQuaternion",
    "Pose",
    "Quaternion",
    "UnitDualQuaternion",
    "dq_mul",
    "dq_vec_norm",
    "make_pose",
    "norm_2R",
    "pose_parts",
    "project_udq",
    "quat_mul",
    "random_udq",
    "RepairResult",
    "nearest_feasible",
    "quat_lstsq",
    "DiGraph",
    "gen_cycle",
    "gen_grid",
    "gen_star",
    "has_simple_zero",
    "make_topology",
    "underlying_laplacian",
    "eigenvalues",
    "jordan_exp_bound",
    "lambda2r",
    "theory_rate",
    "Formation",
    "Scheme",
    "build_dq_laplacian",
    "desired_formation",
    "perturb_scheme",
    "relative_scheme",
    "verify_reasonable",
]

__version__ = "0.1.0"
