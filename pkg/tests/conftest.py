import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pssv_objective(X, Y, N, tau):
    """0.5 ||X - Y||_F^2 + tau * sum_{i>N} sigma_i(X), computed from scratch."""
    s = np.linalg.svd(X, compute_uv=False)
    return 0.5 * np.sum((X - Y) ** 2) + tau * np.sum(s[N:])
