"""Robust PCA and matrix completion by partial sum of singular values."""

from .estimators import PSSVMatrixCompletion, PSSVRobustPCA
from .matcore import (
    SvdFactors,
    lagrangian_value,
    norms,
    project_rank,
    pssv_norm,
    psvt,
    soft_threshold,
    svd,
)
from .metrics import TrialOutcome, nrmse, psnr, rank_deficiency_ratio
from .solvers import (
    CompletionConfig,
    CompletionSolution,
    IterationTrace,
    ObservationMask,
    RpcaConfig,
    RpcaSolution,
    kkt_residuals,
    solve_completion,
    solve_rpca,
)
from .synth import PrngStream, SyntheticInstance, make_instance

__version__ = "0.1.0"

__all__ = [
    "PSSVRobustPCA",
    "PSSVMatrixCompletion",
    "SvdFactors",
    "svd",
    "pssv_norm",
    "norms",
    "soft_threshold",
    "psvt",
    "project_rank",
    "lagrangian_value",
    "RpcaConfig",
    "RpcaSolution",
    "CompletionConfig",
    "CompletionSolution",
    "IterationTrace",
    "ObservationMask",
    "solve_rpca",
    "solve_completion",
    "kkt_residuals",
    "nrmse",
    "psnr",
    "rank_deficiency_ratio",
    "TrialOutcome",
    "PrngStream",
    "SyntheticInstance",
    "make_instance",
]
