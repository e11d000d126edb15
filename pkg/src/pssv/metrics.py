"""Evaluation measures for recovery experiments."""

from dataclasses import dataclass

import numpy as np

from ._validation import check_matrix, check_positive, check_rank, check_same_shape

__all__ = [
    "SUCCESS_THRESHOLD",
    "DEFICIENCY_THRESHOLD",
    "TrialOutcome",
    "nrmse",
    "is_success",
    "rank_deficiency_ratio",
    "psnr",
]

SUCCESS_THRESHOLD = 0.01
DEFICIENCY_THRESHOLD = 0.01


def nrmse(A_gt, A_hat):
    """``||A_gt - A_hat||_F / ||A_gt||_F``."""
    A_gt = check_matrix(A_gt, "A_gt")
    A_hat = check_matrix(A_hat, "A_hat")
    check_same_shape(("A_gt", A_gt), ("A_hat", A_hat))
    ref = np.linalg.norm(A_gt)
    if ref == 0:
        raise ValueError("A_gt is identically zero")
    return float(np.linalg.norm(A_gt - A_hat) / ref)


def is_success(err, threshold=SUCCESS_THRESHOLD):
    return bool(err < threshold)


def rank_deficiency_ratio(A, N):
    """``sigma_N(A) / sigma_1(A)``; values below 0.01 flag a rank-deficient A."""
    A = check_matrix(A, "A")
    N = check_rank(N, min(A.shape), name="N", lower=1)
    s = np.linalg.svd(A, compute_uv=False)
    if s[0] == 0:
        raise ValueError("A is identically zero")
    return float(s[N - 1] / s[0])


def psnr(reference, recovered, peak=None):
    """Peak signal-to-noise ratio in dB.

    `peak` defaults to the maximum of `reference`. Identical inputs return
    ``inf``.
    """
    reference = check_matrix(reference, "reference")
    recovered = check_matrix(recovered, "recovered")
    check_same_shape(("reference", reference), ("recovered", recovered))
    peak = check_positive(reference.max() if peak is None else peak, "peak")
    mse = float(np.mean((reference - recovered) ** 2))
    if mse == 0:
        return float("inf")
    return float(10.0 * np.log10(peak**2 / mse))


@dataclass(frozen=True)
class TrialOutcome:
    nrmse: float
    success: bool
    deficiency_ratio: float
    iterations: int
    converged: bool
    wall_time: float

    @classmethod
    def evaluate(cls, A_gt, A_hat, N, iterations, converged, wall_time,
                 threshold=SUCCESS_THRESHOLD):
        err = nrmse(A_gt, A_hat)
        if np.any(A_hat):
            ratio = rank_deficiency_ratio(A_hat, N)
        else:
            ratio = 0.0
        return cls(err, is_success(err, threshold), ratio, int(iterations), bool(converged),
                   float(wall_time))
