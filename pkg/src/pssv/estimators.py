"""scikit-learn compatible wrappers around the ADMM solvers."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_matrix
from .solvers import CompletionConfig, ObservationMask, RpcaConfig, solve_completion, solve_rpca

__all__ = ["PSSVRobustPCA", "PSSVMatrixCompletion"]


class PSSVRobustPCA(TransformerMixin, BaseEstimator):
    """Low-rank plus sparse decomposition with a partial-sum rank penalty.

    ``fit(X)`` decomposes the whole matrix `X` (rows and columns are treated
    symmetrically; there is no train/test split in RPCA). ``transform(X)``
    returns the low-rank part of `X`, re-solving when `X` is not the fitted
    matrix.

    Parameters
    ----------
    target_rank : int, default=1
        Leading singular values left unpenalized; 0 gives classical
        nuclear-norm RPCA.
    lam : float or None, default=None
        Weight of the l1 term, ``1/sqrt(max(m, n))`` when None.
    rho, mu0, tol, max_iter, inner_iters
        See :class:`pssv.solvers.RpcaConfig`.

    Attributes
    ----------
    low_rank_, sparse_, dual_ : ndarray
    n_iter_ : int
    converged_ : bool
    trace_ : IterationTrace
    lambda_ : float
        The l1 weight actually used.
    """

    def __init__(self, target_rank=1, lam=None, rho=1.5, mu0="auto", tol=1e-7, max_iter=1000,
                 inner_iters=1):
        self.target_rank = target_rank
        self.lam = lam
        self.rho = rho
        self.mu0 = mu0
        self.tol = tol
        self.max_iter = max_iter
        self.inner_iters = inner_iters

    def _config(self):
        return RpcaConfig(target_rank=self.target_rank, lam=self.lam, rho=self.rho, mu0=self.mu0,
                          tol=self.tol, max_iter=self.max_iter, inner_iters=self.inner_iters)

    def fit(self, X, y=None):
        X = check_matrix(X)
        sol = solve_rpca(X, self._config())
        self._fit_X = X
        self.low_rank_ = sol.A
        self.sparse_ = sol.E
        self.dual_ = sol.Z
        self.n_iter_ = sol.iterations
        self.converged_ = sol.converged
        self.trace_ = sol.trace
        self.lambda_ = sol.lam
        self.n_features_in_ = X.shape[1]
        return self

    def fit_transform(self, X, y=None):
        return self.fit(X).low_rank_

    def transform(self, X):
        check_is_fitted(self, "low_rank_")
        X = check_matrix(X)
        if X.shape == self._fit_X.shape and np.array_equal(X, self._fit_X):
            return self.low_rank_
        return solve_rpca(X, self._config()).A


class PSSVMatrixCompletion(TransformerMixin, BaseEstimator):
    """Impute missing entries (NaN) with a partial-sum low-rank fit.

    Observed entries are the non-NaN ones. ``transform`` returns the
    completed matrix; observed entries keep their values up to the solver
    tolerance.

    Parameters
    ----------
    target_rank : int, default=1
    rho : float, default=1.05
    mu0 : float, default=1e-3
    tol : float, default=1e-7
    max_iter : int, default=2000
    """

    def __init__(self, target_rank=1, rho=1.05, mu0=1e-3, tol=1e-7, max_iter=2000):
        self.target_rank = target_rank
        self.rho = rho
        self.mu0 = mu0
        self.tol = tol
        self.max_iter = max_iter

    def _solve(self, X):
        X = check_matrix(X, allow_nan=True)
        cfg = CompletionConfig(target_rank=self.target_rank, rho=self.rho, mu0=self.mu0,
                               tol=self.tol, max_iter=self.max_iter)
        return X, solve_completion(X, ObservationMask(~np.isnan(X)), cfg)

    def fit(self, X, y=None):
        X, sol = self._solve(X)
        self._fit_X = X
        self.completed_ = sol.A
        self.n_iter_ = sol.iterations
        self.converged_ = sol.converged
        self.trace_ = sol.trace
        self.n_features_in_ = X.shape[1]
        return self

    def fit_transform(self, X, y=None):
        return self.fit(X).completed_

    def transform(self, X):
        check_is_fitted(self, "completed_")
        X = check_matrix(X, allow_nan=True)
        if X.shape == self._fit_X.shape and np.array_equal(X, self._fit_X, equal_nan=True):
            return self.completed_
        return self._solve(X)[1].A
