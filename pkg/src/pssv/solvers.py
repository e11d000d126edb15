"""ADMM solvers for partial-sum RPCA and partial-sum matrix completion.

``solve_rpca`` splits an observation ``O`` into a low-rank part ``A`` and a
sparse part ``E``::

    min ||A||_{p=N} + lam * ||E||_1   s.t.  O = A + E

``target_rank=0`` turns the partial sum into the full nuclear norm, i.e. the
classical convex RPCA. ``solve_completion`` fills in unobserved entries::

    min ||A||_{p=N}   s.t.  A = B,  B = O on the observed set
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from ._validation import (
    check_matrix,
    check_positive,
    check_rank,
    check_same_shape,
)
from .matcore import _lagrangian, _psvt, _shrink

__all__ = [
    "RpcaConfig",
    "CompletionConfig",
    "IterationTrace",
    "RpcaSolution",
    "CompletionSolution",
    "ObservationMask",
    "default_lambda",
    "default_init",
    "solve_rpca",
    "solve_completion",
    "kkt_residuals",
]


def default_lambda(shape):
    """Sparsity weight ``1 / sqrt(max(m, n))``."""
    return 1.0 / np.sqrt(max(shape))


def _check_schedule(rho, tol, max_iter):
    rho = float(rho)
    if not np.isfinite(rho) or rho <= 1:
        raise ValueError(f"rho must be > 1, got {rho!r}")
    check_positive(tol, "tol")
    if int(max_iter) != max_iter or max_iter < 1:
        raise ValueError(f"max_iter must be a positive integer, got {max_iter!r}")


@dataclass(frozen=True)
class RpcaConfig:
    """Parameters of :func:`solve_rpca`.

    Attributes
    ----------
    target_rank : int
        Number of leading singular values left unpenalized. 0 selects the
        nuclear-norm baseline.
    lam : float or None
        Weight of the l1 term; None means ``1/sqrt(max(m, n))``.
    rho : float
        Growth factor of the penalty parameter, > 1.
    mu0 : float or "auto"
        Initial penalty; "auto" uses ``1.25 / sigma_1(O)``.
    tol : float
        Stop once ``||O - A - E||_F / ||O||_F < tol``.
    max_iter : int
    inner_iters : int
        Primal sweeps per dual update. 1 is the inexact ALM.
    """

    target_rank: int = 0
    lam: Optional[float] = None
    rho: float = 1.5
    mu0: Union[float, str] = "auto"
    tol: float = 1e-7
    max_iter: int = 1000
    inner_iters: int = 1

    def __post_init__(self):
        if isinstance(self.target_rank, bool) or int(self.target_rank) != self.target_rank \
                or self.target_rank < 0:
            raise ValueError(f"target_rank must be a non-negative integer, got {self.target_rank!r}")
        if self.lam is not None:
            check_positive(self.lam, "lam")
        if not (isinstance(self.mu0, str) and self.mu0 == "auto"):
            check_positive(self.mu0, "mu0")
        _check_schedule(self.rho, self.tol, self.max_iter)
        if int(self.inner_iters) != self.inner_iters or self.inner_iters < 1:
            raise ValueError(f"inner_iters must be a positive integer, got {self.inner_iters!r}")


@dataclass(frozen=True)
class CompletionConfig:
    """Parameters of :func:`solve_completion`.

    The stopping test is ``||A - B||_F / ||P_Omega(O)||_F < tol``.
    """

    target_rank: int = 0
    rho: float = 1.05
    mu0: float = 1e-3
    tol: float = 1e-7
    max_iter: int = 2000

    def __post_init__(self):
        if isinstance(self.target_rank, bool) or int(self.target_rank) != self.target_rank \
                or self.target_rank < 0:
            raise ValueError(f"target_rank must be a non-negative integer, got {self.target_rank!r}")
        check_positive(self.mu0, "mu0")
        _check_schedule(self.rho, self.tol, self.max_iter)


@dataclass
class IterationTrace:
    """Per-iteration history of a solve.

    ``feasibility[k]`` is the relative constraint residual after iteration k,
    ``objective[k]`` the partial-sum objective, ``lagrangian[k]`` the augmented
    Lagrangian at the new primal iterate with the multiplier and penalty used
    in that iteration, and ``mu[k]`` that penalty.
    """

    feasibility: list = field(default_factory=list)
    objective: list = field(default_factory=list)
    lagrangian: list = field(default_factory=list)
    mu: list = field(default_factory=list)

    def __len__(self):
        return len(self.feasibility)

    def append(self, feasibility, objective, lagrangian, mu):
        self.feasibility.append(float(feasibility))
        self.objective.append(float(objective))
        self.lagrangian.append(float(lagrangian))
        self.mu.append(float(mu))

    def rows(self):
        """Yield ``(iteration, feasibility, objective, lagrangian, mu)`` tuples."""
        for k, rec in enumerate(zip(self.feasibility, self.objective, self.lagrangian, self.mu)):
            yield (k + 1, *rec)


@dataclass
class RpcaSolution:
    A: np.ndarray
    E: np.ndarray
    Z: np.ndarray
    iterations: int
    converged: bool
    trace: IterationTrace
    lam: float

    @property
    def residual(self):
        """Relative constraint residual at the returned iterate."""
        return self.trace.feasibility[-1]


@dataclass
class CompletionSolution:
    A: np.ndarray
    B: np.ndarray
    Z: np.ndarray
    iterations: int
    converged: bool
    trace: IterationTrace

    @property
    def residual(self):
        return self.trace.feasibility[-1]


class ObservationMask:
    """Set of observed entries of an ``m x n`` matrix.

    Build one with :meth:`from_indices` or :meth:`from_array`; it is stored
    as a read-only boolean array.
    """

    def __init__(self, observed):
        observed = np.array(observed, dtype=bool)
        if observed.ndim != 2 or observed.size == 0:
            raise ValueError("mask must be a non-empty 2-D array")
        observed.setflags(write=False)
        self._observed = observed

    @classmethod
    def from_indices(cls, shape, rows, cols):
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        m, n = shape
        if rows.shape != cols.shape:
            raise ValueError("rows and cols must have equal length")
        if rows.size and (rows.min() < 0 or rows.max() >= m or cols.min() < 0 or cols.max() >= n):
            raise ValueError(f"observed indices out of bounds for shape {shape}")
        flat = rows * n + cols
        if np.unique(flat).size != flat.size:
            raise ValueError("observed indices contain duplicates")
        observed = np.zeros(m * n, dtype=bool)
        observed[flat] = True
        return cls(observed.reshape(m, n))

    @classmethod
    def from_array(cls, array):
        """Mask from a 0/1 (or boolean) matrix."""
        array = np.asarray(array)
        if array.dtype != bool:
            values = np.unique(array)
            if not np.isin(values, (0, 1)).all():
                raise ValueError("mask entries must be 0 or 1")
        return cls(array.astype(bool))

    @property
    def shape(self):
        return self._observed.shape

    @property
    def array(self):
        return self._observed

    @property
    def count(self):
        return int(self._observed.sum())

    @property
    def observed(self):
        """Observed ``(i, j)`` pairs in row-major order."""
        return [tuple(ij) for ij in np.argwhere(self._observed).tolist()]

    def project(self, X):
        """Zero every entry of `X` outside the observed set."""
        return np.where(self._observed, X, 0.0)

    def __eq__(self, other):
        return isinstance(other, ObservationMask) and np.array_equal(self._observed, other._observed)

    def __repr__(self):
        return f"ObservationMask(shape={self.shape}, count={self.count})"


def default_init(O, lam):
    """Default starting point ``(A0, E0, Z0, mu0)``.

    ``A0 = E0 = 0``, ``Z0 = O / max(sigma_1(O), max|O| / lam)`` and
    ``mu0 = 1.25 / sigma_1(O)``, the usual inexact-ALM choices.
    """
    sigma1 = float(np.linalg.norm(O, 2))
    dual_norm = max(sigma1, float(np.abs(O).max()) / lam)
    zeros = np.zeros_like(O)
    return zeros, zeros.copy(), O / dual_norm, 1.25 / sigma1


def solve_rpca(O, cfg=None, *, init=None, callback: Optional[Callable] = None):
    """Decompose `O` into low-rank plus sparse parts by ADMM.

    Each outer iteration runs ``cfg.inner_iters`` sweeps of::

        A <- PSVT_{N, 1/mu}(O - E + Z/mu)
        E <- S_{lam/mu}(O - A + Z/mu)

    followed by ``Z <- Z + mu (O - A - E)`` and ``mu <- rho mu``. The loop
    stops once the relative residual drops below ``cfg.tol``; hitting
    ``cfg.max_iter`` returns a solution with ``converged=False``.

    Parameters
    ----------
    O : array_like, shape (m, n)
        Observation; must be finite and not identically zero.
    cfg : RpcaConfig, optional
    init : tuple, optional
        ``(A0, E0, Z0)``; any ``None`` entry falls back to :func:`default_init`.
    callback : callable, optional
        Called as ``callback(k, state)`` after the primal updates of
        iteration k and before the dual update. `state` holds ``A_prev``,
        ``E_prev``, ``A``, ``E``, ``Z`` (the multiplier used in the
        iteration) and ``mu``.

    Returns
    -------
    RpcaSolution
    """
    cfg = RpcaConfig() if cfg is None else cfg
    O = check_matrix(O, "O")
    if not np.any(O):
        raise ValueError("O is identically zero")
    N = check_rank(cfg.target_rank, min(O.shape), name="target_rank")
    lam = default_lambda(O.shape) if cfg.lam is None else float(cfg.lam)

    A, E, Z, mu_auto = default_init(O, lam)
    if init is not None:
        A0, E0, Z0 = init
        if A0 is not None:
            A = check_matrix(A0, "A0")
        if E0 is not None:
            E = check_matrix(E0, "E0")
        if Z0 is not None:
            Z = check_matrix(Z0, "Z0")
        check_same_shape(("O", O), ("A0", A), ("E0", E), ("Z0", Z))
    mu = mu_auto if cfg.mu0 == "auto" else float(cfg.mu0)

    norm_O = np.linalg.norm(O)
    trace = IterationTrace()
    converged = False
    for k in range(cfg.max_iter):
        A_prev, E_prev = A, E
        for _ in range(cfg.inner_iters):
            A, sigma_A = _psvt(O - E + Z / mu, N, 1.0 / mu)
            E = _shrink(O - A + Z / mu, lam / mu)
        R = O - A - E
        feasibility = np.linalg.norm(R) / norm_O
        objective = np.sum(sigma_A[N:]) + lam * np.abs(E).sum()
        lagr = _lagrangian(A, E, Z, O, N, lam, mu, sigma_A)
        if callback is not None:
            callback(k, {"A_prev": A_prev, "E_prev": E_prev, "A": A, "E": E, "Z": Z, "mu": mu})
        trace.append(feasibility, objective, lagr, mu)
        Z = Z + mu * R
        mu *= cfg.rho
        if feasibility < cfg.tol:
            converged = True
            break

    return RpcaSolution(A=A, E=E, Z=Z, iterations=len(trace), converged=converged,
                        trace=trace, lam=lam)


def solve_completion(O, mask, cfg=None):
    """Fill in the unobserved entries of `O` with a partial-sum low-rank fit.

    Iterates::

        A <- PSVT_{N, 1/mu}(B - Z/mu)
        B <- A + Z/mu, then B[observed] = O[observed]
        Z <- Z + mu (A - B);  mu <- rho mu

    starting from ``A = 0``, ``Z = 0`` and ``B`` equal to the observed
    entries (zeros elsewhere). Values of `O` off the mask are ignored and may
    be NaN.

    Returns
    -------
    CompletionSolution
    """
    cfg = CompletionConfig() if cfg is None else cfg
    O = check_matrix(O, "O", allow_nan=True)
    if not isinstance(mask, ObservationMask):
        mask = ObservationMask.from_array(mask)
    if mask.shape != O.shape:
        raise ValueError(f"mask shape {mask.shape} does not match matrix shape {O.shape}")
    if mask.count == 0:
        raise ValueError("mask has no observed entries")
    observed = mask.array
    if np.isnan(O[observed]).any():
        raise ValueError("O has NaN at observed positions")
    N = check_rank(cfg.target_rank, min(O.shape), name="target_rank")

    P_O = np.where(observed, O, 0.0)
    norm_P_O = np.linalg.norm(P_O)
    if norm_P_O == 0:
        raise ValueError("observed entries are all zero")
    B = P_O.copy()
    Z = np.zeros_like(P_O)
    A = np.zeros_like(P_O)
    mu = float(cfg.mu0)

    trace = IterationTrace()
    converged = False
    for _ in range(cfg.max_iter):
        A, sigma_A = _psvt(B - Z / mu, N, 1.0 / mu)
        B = A + Z / mu
        B[observed] = P_O[observed]
        R = A - B
        feasibility = np.linalg.norm(R) / norm_P_O
        objective = np.sum(sigma_A[N:])
        lagr = objective + np.vdot(Z, R) + 0.5 * mu * np.vdot(R, R)
        trace.append(feasibility, objective, lagr, mu)
        Z = Z + mu * R
        mu *= cfg.rho
        if feasibility < cfg.tol:
            converged = True
            break

    return CompletionSolution(A=A, B=B, Z=Z, iterations=len(trace), converged=converged,
                              trace=trace)


def kkt_residuals(O, A, E, Z, lam):
    """First-order optimality residuals of an RPCA iterate.

    Returns a dict with

    * ``feasibility``: ``||O - A - E||_F / ||O||_F``;
    * ``e_stationarity``: largest violation of ``Z in lam * d||E||_1``, i.e.
      ``max(|Z_ij| - lam, 0)`` where ``E_ij = 0`` and
      ``|Z_ij - lam * sign(E_ij)|`` elsewhere.
    """
    O, A, E, Z = (check_matrix(M, name) for M, name in zip((O, A, E, Z), "OAEZ"))
    check_same_shape(("O", O), ("A", A), ("E", E), ("Z", Z))
    lam = check_positive(lam, "lam")
    norm_O = np.linalg.norm(O)
    if norm_O == 0:
        raise ValueError("O is identically zero")
    feasibility = np.linalg.norm(O - A - E) / norm_O
    zero = E == 0
    viol = np.where(zero, np.maximum(np.abs(Z) - lam, 0.0), np.abs(Z - lam * np.sign(E)))
    return {"feasibility": float(feasibility), "e_stationarity": float(viol.max())}
