"""The three competing tests run on one pair of samples.

``base`` uses the Gaussian kernel on raw signals, ``invariant`` the
group-averaged kernel and ``aligned`` the Gaussian kernel after medoid
registration to the pooled medoid.  One bandwidth from the raw pooled sample serves all three.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .alignment import aligned_pool_values
from .group_average import (
    averaged_gram_values,
    build_orbit_samples,
    periodic_spec,
    select_c_values,
    window_spec,
)
from .kernels import GaussianKernel, gram_values, median_heuristic_values
from .mmd import GramMatrix, TestReport, permutation_test
from .signals import Grid, ShiftMode, unstack

METHODS = ("base", "invariant", "aligned")
SETTINGS = ("periodic", "aperiodic")

# stream ids under one master seed
_SHIFT_STREAM = 1
_PERM_STREAM = 2


def derive_seed(*keys: int) -> int:
    """Deterministic 63-bit seed from a tuple of non-negative integers."""
    state = np.random.SeedSequence([int(k) for k in keys]).generate_state(1, np.uint64)[0]
    return int(state >> np.uint64(1))


@dataclass
class MethodOutcome:
    reports: dict[str, TestReport]
    sigma: float
    c: float | None = None
    seconds: dict[str, float] = field(default_factory=dict)


def run_methods(x_values: np.ndarray, y_values: np.ndarray, grid: Grid, setting: str, *,
                S: int = 16, B: int = 200, alpha: float = 0.05, seed: int = 0,
                methods=METHODS, sigma: float | None = None, c: float | None = None) -> MethodOutcome:
    """Run the requested tests on stacked samples ``(n, p)`` and ``(m, p)``."""
    if setting not in SETTINGS:
        raise ValueError(f"unknown setting {setting!r}")
    pooled = np.vstack([x_values, y_values])
    n = len(x_values)
    if sigma is None:
        sigma = median_heuristic_values(pooled, grid.step)
    kernel = GaussianKernel(sigma)
    mode = ShiftMode.PERIODIC_WRAP if setting == "periodic" else ShiftMode.ZERO_PAD
    out = MethodOutcome({}, sigma)
    for j, method in enumerate(METHODS):
        if method not in methods:
            continue
        t0 = time.perf_counter()
        if method == "base":
            K = gram_values(kernel, pooled, grid.step)
        elif method == "invariant":
            shift_seed = derive_seed(seed, _SHIFT_STREAM)
            if setting == "periodic":
                spec = periodic_spec(sigma, grid.length, S, shift_seed)
            else:
                if c is None:
                    c = select_c_values(pooled, grid.points)
                out.c = c
                spec = window_spec(sigma, c, S, shift_seed)
            samples = build_orbit_samples(unstack(grid, pooled), spec)
            K = averaged_gram_values(pooled, grid, spec,
                                     np.stack([s.shifts for s in samples]),
                                     np.array([s.weight for s in samples]))
        else:
            K = gram_values(kernel, aligned_pool_values(x_values, y_values, grid, mode), grid.step)
        rng = np.random.default_rng([int(seed), _PERM_STREAM, j])
        out.reports[method] = permutation_test(GramMatrix(K, n), B, alpha, rng, seed=seed)
        out.seconds[method] = time.perf_counter() - t0
    return out
