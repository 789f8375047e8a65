"""Unbiased MMD^2 and permutation calibration on a cached pooled Gram matrix."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import SampleTooSmall
from .group_average import AveragedKernelSpec, OrbitSamples, averaged_gram
from .kernels import GaussianKernel, gram_values
from .signals import DiscretizedSignal, stack


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """Pooled kernel matrix; rows ``[:n]`` are sample X, the rest sample Y."""
    values: np.ndarray
    n: int

    def __post_init__(self):
        K = np.asarray(self.values, dtype=float)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise ValueError(f"Gram matrix must be square, got {K.shape}")
        if not np.all(np.isfinite(K)):
            raise ValueError("Gram matrix has non-finite entries")
        if not np.allclose(K, K.T, rtol=0, atol=1e-12):
            raise ValueError("Gram matrix is not symmetric")
        if not 0 <= self.n <= len(K):
            raise ValueError(f"split n={self.n} out of range for size {len(K)}")
        object.__setattr__(self, "values", K)

    @property
    def N(self) -> int:
        return len(self.values)

    @property
    def m(self) -> int:
        return self.N - self.n


@dataclass(frozen=True)
class TestReport:
    mmd2: float
    p_value: float
    reject: bool
    B: int
    alpha: float
    seed: int | None = None

    __test__ = False  # not a pytest class


def _check_sizes(n: int, m: int) -> None:
    if n < 2 or m < 2:
        raise SampleTooSmall(f"need at least two observations per sample, got n={n}, m={m}")


def mmd2_ustat(gram: GramMatrix, idx: Sequence[int] | None = None) -> float:
    """Unbiased MMD^2 with the first ``n`` positions of ``idx`` labelled X."""
    _check_sizes(gram.n, gram.m)
    if idx is None:
        return float(permuted_statistics(gram, np.arange(gram.N)[None, :])[0])
    return float(permuted_statistics(gram, np.asarray(idx)[None, :])[0])


def permuted_statistics(gram: GramMatrix, perms: np.ndarray) -> np.ndarray:
    """MMD^2 U-statistics for each row of ``perms`` (shape ``(B, N)``)."""
    n, m = gram.n, gram.m
    _check_sizes(n, m)
    perms = np.atleast_2d(perms)
    K = gram.values
    K0 = K - np.diag(np.diag(K))
    ax = np.zeros((len(perms), gram.N))
    np.put_along_axis(ax, perms[:, :n], 1.0, axis=1)
    ay = 1.0 - ax
    KA = ax @ K0
    sxx = np.einsum("bi,bi->b", KA, ax)
    sxy = np.einsum("bi,bi->b", ax @ K, ay)
    syy = np.einsum("bi,bi->b", ay @ K0, ay)
    return sxx / (n * (n - 1)) + syy / (m * (m - 1)) - 2.0 * sxy / (n * m)


def p_value_from(stat: float, null_stats: np.ndarray) -> float:
    B = len(null_stats)
    return (1.0 + np.count_nonzero(null_stats >= stat)) / (B + 1.0)


def permutation_test(gram: GramMatrix, B: int = 200, alpha: float = 0.05, rng=None,
                     permutations: np.ndarray | None = None, seed: int | None = None) -> TestReport:
    """Permutation test with ``p = (1 + #{stat_b >= stat}) / (B + 1)``.

    Permutations are drawn uniformly from the full symmetric group unless an
    explicit ``(B, N)`` array is supplied.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    stat = mmd2_ustat(gram)
    if permutations is None:
        if B < 1:
            raise ValueError(f"need B >= 1 permutations, got {B}")
        if rng is None:
            rng = np.random.default_rng(seed)
        permutations = rng.permuted(np.tile(np.arange(gram.N), (B, 1)), axis=1)
    permutations = np.atleast_2d(permutations)
    null = permuted_statistics(gram, permutations)
    # equal statistics computed along different summation orders may differ by rounding
    tol = 1e-12 * max(1.0, abs(stat))
    p = p_value_from(stat - tol, null)
    return TestReport(float(stat), float(p), bool(p <= alpha), len(permutations), float(alpha), seed)


def build_gram(pool: Sequence[DiscretizedSignal], n: int, kernel: GaussianKernel | AveragedKernelSpec,
               orbit_samples: Sequence[OrbitSamples] | None = None) -> GramMatrix:
    """Pooled Gram for the base kernel or, given a spec, the averaged kernel."""
    if isinstance(kernel, AveragedKernelSpec):
        return GramMatrix(averaged_gram(pool, kernel, orbit_samples), n)
    grid, values = stack(pool)
    return GramMatrix(gram_values(kernel, values, grid.step), n)
