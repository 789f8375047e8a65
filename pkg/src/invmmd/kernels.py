"""Gaussian kernel on discretized L2 signals and the median heuristic."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegeneratePool
from .signals import DiscretizedSignal, check_same_grid, l2_norm_sq, stack


@dataclass(frozen=True)
class GaussianKernel:
    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0 and np.isfinite(self.sigma)):
            raise ValueError(f"bandwidth must be positive, got {self.sigma}")

    def __call__(self, x: DiscretizedSignal, y: DiscretizedSignal) -> float:
        return eval_kernel(self, x, y)

    def from_sq_dists(self, d2: np.ndarray) -> np.ndarray:
        return np.exp(-d2 / (2.0 * self.sigma ** 2))


def eval_kernel(k: GaussianKernel, x: DiscretizedSignal, y: DiscretizedSignal) -> float:
    """``exp(-||x - y||^2 / (2 sigma^2))``."""
    check_same_grid(x, y)
    return float(np.exp(-l2_norm_sq(x - y) / (2.0 * k.sigma ** 2)))


def pairwise_sq_dists(A: np.ndarray, B: np.ndarray | None = None, step: float = 1.0) -> np.ndarray:
    """Squared L2 distances between rows, scaled by the grid step.

    Uses the Gram expansion, so values are clipped at zero.
    """
    sym = B is None
    if sym:
        B = A
    na = np.einsum("ij,ij->i", A, A)
    nb = na if sym else np.einsum("ij,ij->i", B, B)
    d2 = na[:, None] + nb[None, :] - 2.0 * (A @ B.T)
    np.maximum(d2, 0.0, out=d2)
    if sym:
        np.fill_diagonal(d2, 0.0)
        d2 = 0.5 * (d2 + d2.T)
    return step * d2


def gram_values(k: GaussianKernel, values: np.ndarray, step: float) -> np.ndarray:
    return k.from_sq_dists(pairwise_sq_dists(values, step=step))


def median_heuristic(pool: Sequence[DiscretizedSignal]) -> float:
    """Median of the pairwise L2 distances over distinct pairs ``i < j``."""
    if len(pool) < 2:
        raise DegeneratePool("median heuristic needs at least two signals")
    grid, values = stack(pool)
    return median_heuristic_values(values, grid.step)


def median_heuristic_values(values: np.ndarray, step: float) -> float:
    diff = values[:, None, :] - values[None, :, :]
    iu = np.triu_indices(len(values), k=1)
    d = np.sqrt(step * np.einsum("ijk,ijk->ij", diff, diff)[iu])
    sigma = float(np.median(d))
    if np.all(d == 0):
        raise DegeneratePool("all pairwise distances are zero")
    if sigma == 0:
        # more than half the pairs coincide; fall back to the positive distances
        sigma = float(np.median(d[d > 0]))
    return sigma
