r"""Matrix primitives: thin SVD, norms and the thresholding operators.

All functions are pure and operate on dense float64 arrays. The operators
here are the building blocks of the ADMM solvers in :mod:`pssv.solvers`.
"""

from typing import NamedTuple

import numpy as np

from ._validation import (
    check_matrix,
    check_nonnegative,
    check_positive,
    check_rank,
    check_same_shape,
)

__all__ = [
    "SvdFactors",
    "svd",
    "pssv_norm",
    "norms",
    "soft_threshold",
    "psvt",
    "project_rank",
    "lagrangian_value",
]


class SvdFactors(NamedTuple):
    """Thin SVD ``X = U @ diag(sigma) @ V.T``.

    `sigma` is non-increasing, `U` is ``m x l`` and `V` is ``n x l`` with
    ``l = min(m, n)``.
    """

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    def reconstruct(self):
        return (self.U * self.sigma) @ self.V.T


def svd(X):
    """Thin singular value decomposition.

    Raises ``ValueError`` on non-finite input and
    ``numpy.linalg.LinAlgError`` if LAPACK fails to converge.
    """
    X = check_matrix(X)
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    return SvdFactors(U, s, Vt.T)


def _singular_values(X):
    return np.linalg.svd(X, compute_uv=False)


def pssv_norm(X, p):
    r"""Partial sum of singular values :math:`\sum_{i>p} \sigma_i(X)`.

    ``p = 0`` gives the nuclear norm and ``p = min(m, n)`` gives 0.
    """
    X = check_matrix(X)
    p = check_rank(p, min(X.shape), name="p")
    return float(np.sum(_singular_values(X)[p:]))


def norms(X):
    """Nuclear, entrywise l1, Frobenius and max-abs norms of `X` as a dict."""
    X = check_matrix(X)
    absX = np.abs(X)
    return {
        "nuclear": float(np.sum(_singular_values(X))),
        "l1": float(absX.sum()),
        "fro": float(np.linalg.norm(X)),
        "linf": float(absX.max()),
    }


def _shrink(x, tau):
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def soft_threshold(X, tau):
    """Element-wise shrinkage ``sign(x) * max(|x| - tau, 0)``.

    This is the proximal map of ``tau * ||.||_1``.
    """
    X = check_matrix(X)
    tau = check_nonnegative(tau, "tau")
    return _shrink(X, tau)


def _psvt(Y, N, tau):
    # unchecked core shared with the solvers; also returns the new spectrum
    U, s, Vt = np.linalg.svd(Y, full_matrices=False)
    s_new = s.copy()
    s_new[N:] = np.maximum(s[N:] - tau, 0.0)
    return (U * s_new) @ Vt, s_new


def psvt(Y, N, tau):
    r"""Partial singular value thresholding.

    Keeps the `N` leading singular values of `Y` and soft-thresholds the
    remaining ones by `tau`, reusing the singular vectors of `Y`. The result
    is the global minimizer of

    .. math::
        \tfrac12 \|X - Y\|_F^2 + \tau \sum_{i > N} \sigma_i(X).

    With ``N = 0`` this is ordinary singular value thresholding; a large
    `tau` yields the rank-`N` truncation of `Y`.

    Parameters
    ----------
    Y : array_like, shape (m, n)
    N : int
        Target rank, ``0 <= N <= min(m, n)``.
    tau : float
        Threshold, ``tau >= 0``.

    Returns
    -------
    ndarray, shape (m, n)
    """
    Y = check_matrix(Y, "Y")
    N = check_rank(N, min(Y.shape), name="N")
    tau = check_nonnegative(tau, "tau")
    return _psvt(Y, N, tau)[0]


def project_rank(X, r):
    """Best rank-`r` approximation of `X` (truncated SVD, returned as m x n)."""
    X = check_matrix(X)
    r = check_rank(r, min(X.shape), name="r", lower=1)
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    return (U[:, :r] * s[:r]) @ Vt[:r]


def lagrangian_value(A, E, Z, O, N, lam, mu):
    r"""Augmented Lagrangian of the partial-sum RPCA problem.

    .. math::
        \|A\|_{p=N} + \lambda \|E\|_1 + \langle Z, O - A - E \rangle
        + \tfrac{\mu}{2} \|O - A - E\|_F^2
    """
    A, E, Z, O = (check_matrix(M, name) for M, name in zip((A, E, Z, O), "AEZO"))
    check_same_shape(("A", A), ("E", E), ("Z", Z), ("O", O))
    N = check_rank(N, min(O.shape), name="N")
    mu = check_positive(mu, "mu")
    return _lagrangian(A, E, Z, O, N, float(lam), mu)


def _lagrangian(A, E, Z, O, N, lam, mu, sigma_A=None):
    if sigma_A is None:
        sigma_A = _singular_values(A)
    R = O - A - E
    return float(
        np.sum(sigma_A[N:])
        + lam * np.abs(E).sum()
        + np.vdot(Z, R)
        + 0.5 * mu * np.vdot(R, R)
    )
