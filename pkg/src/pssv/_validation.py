"""Input validation helpers shared by operators, solvers and estimators."""

import numbers

import numpy as np


def check_matrix(X, name="X", allow_nan=False):
    """Return `X` as a 2-D float64 array, rejecting empty or non-finite input.

    Parameters
    ----------
    X : array_like
        Candidate matrix.
    name : str
        Name used in error messages.
    allow_nan : bool
        Permit NaN entries (used to encode missing values). Infinities are
        always rejected.

    Raises
    ------
    ValueError
        If `X` is not two-dimensional, is empty, or holds non-finite values.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix, got ndim={X.ndim}")
    if X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and one column, got shape {X.shape}")
    if allow_nan:
        if np.isinf(X).any():
            raise ValueError(f"{name} contains infinite values")
    elif not np.isfinite(X).all():
        raise ValueError(f"{name} contains NaN or infinite values")
    return X


def check_same_shape(*pairs):
    """Raise ValueError unless every ``(name, array)`` pair shares one shape."""
    shapes = {name: np.shape(arr) for name, arr in pairs}
    if len(set(shapes.values())) > 1:
        desc = ", ".join(f"{k}={v}" for k, v in shapes.items())
        raise ValueError(f"shape mismatch: {desc}")


def check_rank(value, upper, name="rank", lower=0):
    """Validate an integer rank index in ``[lower, upper]``."""
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if not lower <= value <= upper:
        raise ValueError(f"{name} must lie in [{lower}, {upper}], got {value}")
    return value


def check_nonnegative(value, name):
    value = float(value)
    if not np.isfinite(value) or value < 0:
        raise ValueError(f"{name} must be a finite non-negative scalar, got {value!r}")
    return value


def check_positive(value, name):
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a finite positive scalar, got {value!r}")
    return value


def check_fraction(value, name, *, open_low=False):
    """Validate a fraction in ``[0, 1]`` (``(0, 1]`` when `open_low`)."""
    value = float(value)
    low_ok = value > 0 if open_low else value >= 0
    if not (np.isfinite(value) and low_ok and value <= 1):
        interval = "(0, 1]" if open_low else "[0, 1]"
        raise ValueError(f"{name} must lie in {interval}, got {value!r}")
    return value
