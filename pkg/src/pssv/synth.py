"""Seeded generators for planted low-rank + sparse instances and masks.

Every generator takes a :class:`PrngStream`. Streams are addressed by
``(master_seed, stream_index)`` and built on numpy's PCG64 through a
``SeedSequence`` spawn key, so trial ``t`` of an experiment sees the same
data regardless of how many other trials run or in what order.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import check_fraction, check_matrix, check_rank
from .solvers import ObservationMask

__all__ = [
    "PrngStream",
    "SyntheticInstance",
    "gen_low_rank",
    "corrupt_sparse",
    "gen_unbalanced",
    "gen_mask",
    "make_instance",
    "sample_without_replacement",
    "demo_image",
]


@dataclass(frozen=True)
class PrngStream:
    """Address of an independent random stream."""

    master_seed: int
    stream_index: int = 0
    algorithm: str = "PCG64"

    def generator(self, *substream):
        """Fresh ``numpy.random.Generator`` for this stream.

        Extra integers select a sub-stream, so that e.g. the basis and the
        corruption of one instance never share draws.
        """
        seq = np.random.SeedSequence(
            entropy=int(self.master_seed),
            spawn_key=(int(self.stream_index), *map(int, substream)),
        )
        return np.random.Generator(np.random.PCG64(seq))

    def child(self, index):
        return PrngStream(self.master_seed, index, self.algorithm)


@dataclass(frozen=True)
class SyntheticInstance:
    A_gt: np.ndarray
    E_gt: np.ndarray
    O: np.ndarray
    true_rank: int
    corruption_ratio: float
    stream: PrngStream

    @property
    def shape(self):
        return self.O.shape


def sample_without_replacement(size, k, rng):
    """First `k` slots of a partial Fisher-Yates shuffle of ``range(size)``."""
    if not 0 <= k <= size:
        raise ValueError(f"cannot draw {k} of {size} items")
    perm = np.arange(size)
    if k == 0:
        return perm[:0]
    targets = rng.integers(np.arange(k), size)
    for i, j in enumerate(targets.tolist()):
        perm[i], perm[j] = perm[j], perm[i]
    return perm[:k].copy()


def gen_low_rank(m, n, rank, stream, *, orthonormal=False):
    """Rank-`rank` matrix whose columns mix an orthogonal basis with U[0,1] weights.

    The basis is the Gram-Schmidt orthogonalization of an ``m x rank``
    U[0,1] draw, left unnormalized so the clean entries stay on the same
    scale as U[0,1] outliers (the first basis vector is the raw draw). Pass
    ``orthonormal=True`` for unit-norm basis vectors instead. Each of the `n`
    columns is the basis times its own U[0,1] weight vector.
    """
    rank = check_rank(rank, min(m, n), name="rank", lower=1)
    rng = stream.generator(0)
    Q, R = np.linalg.qr(rng.uniform(0.0, 1.0, size=(m, rank)))
    basis = Q if orthonormal else Q * np.diag(R)
    weights = rng.uniform(0.0, 1.0, size=(rank, n))
    return basis @ weights


def corrupt_sparse(A, r, stream, *, additive=False):
    """Corrupt ``round(m*n*r)`` entries of `A` with U[0,1] noise.

    By default the chosen entries are replaced by the noise draw; with
    ``additive=True`` the draw is added instead. Returns ``(E_gt, O)`` with
    ``O = A + E_gt``.
    """
    A = check_matrix(A, "A")
    r = check_fraction(r, "r")
    m, n = A.shape
    k = int(round(m * n * r))
    rng = stream.generator(1)
    flat = sample_without_replacement(m * n, k, rng)
    noise = rng.uniform(0.0, 1.0, size=k)
    E = np.zeros(m * n)
    if additive:
        E[flat] = noise
    else:
        E[flat] = noise - A.ravel()[flat]
    E = E.reshape(m, n)
    return E, A + E


def gen_unbalanced(m, n, sigmas, stream):
    """``U diag(sigmas) V^T`` with random orthonormal `U` (m x k), `V` (n x k)."""
    sigmas = np.asarray(sigmas, dtype=np.float64).ravel()
    k = check_rank(len(sigmas), min(m, n), name="len(sigmas)", lower=1)
    if (sigmas < 0).any():
        raise ValueError("sigmas must be non-negative")
    rng = stream.generator(2)
    U, _ = np.linalg.qr(rng.standard_normal((m, k)))
    V, _ = np.linalg.qr(rng.standard_normal((n, k)))
    return (U * sigmas) @ V.T


def gen_mask(m, n, observe_fraction, stream):
    """Uniformly sampled mask with ``round(m*n*observe_fraction)`` entries."""
    frac = check_fraction(observe_fraction, "observe_fraction", open_low=True)
    k = int(round(m * n * frac))
    if k == 0:
        raise ValueError("observe_fraction too small: no entries would be observed")
    flat = sample_without_replacement(m * n, k, stream.generator(3))
    return ObservationMask.from_indices((m, n), flat // n, flat % n)


def make_instance(m, n, rank, r, stream, *, additive=False, orthonormal=False):
    """Planted instance: low-rank ground truth plus sparse corruption."""
    A = gen_low_rank(m, n, rank, stream, orthonormal=orthonormal)
    E, O = corrupt_sparse(A, r, stream, additive=additive)
    return SyntheticInstance(A_gt=A, E_gt=E, O=O, true_rank=rank, corruption_ratio=float(r),
                             stream=stream)


def demo_image(size=128):
    """Deterministic 8-bit grayscale test scene, values in [0, 255].

    Smooth shading plus a few hard-edged shapes and a texture stripe: low
    rank dominated but not exactly low rank, like a natural photograph.
    """
    y, x = np.mgrid[0:size, 0:size] / (size - 1)
    img = 90 + 60 * x + 40 * np.sin(2 * np.pi * y) * np.cos(np.pi * x)
    img += 70 * ((x - 0.3) ** 2 + (y - 0.35) ** 2 < 0.04)
    img -= 60 * ((x > 0.55) & (x < 0.85) & (y > 0.55) & (y < 0.9))
    img += 25 * np.sin(12 * np.pi * x) * (y > 0.75)
    img += 30 * (np.abs(x + y - 1.0) < 0.03)
    return np.clip(np.round(img), 0, 255)
