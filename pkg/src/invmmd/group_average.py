"""Haar-averaged shift-invariant kernels.

Two group actions on discretized signals are supported:

* ``CircularShift``: the circle acting by periodic shifts.  The group is
  compact, the weight is ``rho = 1`` with the Haar measure normalised to a
  probability, so orbit weights are 1 and shifts are uniform on a period.
* ``RealLineShift``: the real line acting by zero-padded translations, with
  the Gaussian-window energy weight ``rho_c(x) = int x(u)^2 exp(-u^2/2c^2) du``.

For the window weight, ``rho_c(x(. - tau))`` as a function of ``tau`` is a
mixture of Gaussians: component ``k`` has mass proportional to ``x(t_k)^2``,
mean ``-t_k`` and standard deviation ``c``.  Its total mass is
``sqrt(2 pi) c ||x||^2``, which is the orbit weight.

Shifts are drawn once per signal.  Every kernel entry involving a signal
reuses the same draws, so the pooled Gram matrix is the Gram matrix of
empirical averaged feature maps and stays positive semidefinite.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import AllDegenerate, DegenerateSignal, GridMismatch
from .kernels import GaussianKernel, pairwise_sq_dists
from .signals import (
    DiscretizedSignal,
    Grid,
    ShiftMode,
    check_same_grid,
    shift_array,
    stack,
)

SQRT_2PI = float(np.sqrt(2.0 * np.pi))


@dataclass(frozen=True)
class CircularShift:
    period: float

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError("period must be positive")


@dataclass(frozen=True)
class RealLineShift:
    pass


@dataclass(frozen=True)
class Unit:
    pass


@dataclass(frozen=True)
class GaussianWindow:
    c: float

    def __post_init__(self):
        if not (self.c > 0 and np.isfinite(self.c)):
            raise ValueError(f"window width must be positive, got {self.c}")


GroupAction = Union[CircularShift, RealLineShift]
WeightConfig = Union[Unit, GaussianWindow]


@dataclass(frozen=True)
class AveragedKernelSpec:
    base: GaussianKernel
    action: GroupAction
    weight: WeightConfig
    S: int = 16
    rng_seed: int = 0

    def __post_init__(self):
        if int(self.S) != self.S or self.S < 1:
            raise ValueError(f"Monte Carlo budget must be >= 1, got {self.S}")
        if isinstance(self.action, CircularShift) and not isinstance(self.weight, Unit):
            raise ValueError("circular shifts use the unit weight")
        if isinstance(self.action, RealLineShift) and not isinstance(self.weight, GaussianWindow):
            raise ValueError("real-line shifts need a Gaussian window weight")

    @property
    def mode(self) -> ShiftMode:
        if isinstance(self.action, CircularShift):
            return ShiftMode.PERIODIC_WRAP
        return ShiftMode.ZERO_PAD

    def check_grid(self, grid: Grid) -> None:
        if isinstance(self.action, CircularShift) and not np.isclose(self.action.period, grid.length):
            raise GridMismatch(
                f"circular period {self.action.period} does not match grid length {grid.length}")


@dataclass(frozen=True, eq=False)
class OrbitSamples:
    index: int
    shifts: np.ndarray
    weight: float


def periodic_spec(sigma: float, period: float, S: int = 16, seed: int = 0) -> AveragedKernelSpec:
    return AveragedKernelSpec(GaussianKernel(sigma), CircularShift(period), Unit(), S, seed)


def window_spec(sigma: float, c: float, S: int = 16, seed: int = 0) -> AveragedKernelSpec:
    return AveragedKernelSpec(GaussianKernel(sigma), RealLineShift(), GaussianWindow(c), S, seed)


def rho_c_discrete(x: DiscretizedSignal, c: float) -> float:
    t = x.grid.points
    return float(x.grid.step * np.sum(x.values ** 2 * np.exp(-t ** 2 / (2.0 * c ** 2))))


def select_c_values(values: np.ndarray, t: np.ndarray) -> float:
    e = values ** 2
    mass = e.sum(axis=1)
    ok = mass > 0
    e, mass = e[ok], mass[ok]
    mu = (e @ t) / mass
    s2 = np.einsum("ik,ik->i", e, (t[None, :] - mu[:, None]) ** 2) / mass
    s = np.sqrt(np.maximum(s2, 0.0))
    s = s[s > 1e-12 * (np.ptp(t) or 1.0)]
    if len(s) == 0:
        raise AllDegenerate("no signal has positive temporal energy dispersion")
    return float(np.median(s))


def select_c(pool: Sequence[DiscretizedSignal]) -> float:
    """Window width: median temporal spread of signal energy over the pool.

    For each signal the energy ``x^2`` defines a barycentre and a standard
    deviation on the grid; signals with zero spread are skipped.
    """
    grid, values = stack(pool)
    return select_c_values(values, grid.points)


def _weights(values: np.ndarray, grid: Grid, weight: WeightConfig) -> np.ndarray:
    if isinstance(weight, Unit):
        return np.ones(len(values))
    return SQRT_2PI * weight.c * grid.step * np.einsum("ij,ij->i", values, values)


def orbit_weight(x: DiscretizedSignal, spec: AveragedKernelSpec) -> float:
    return float(_weights(x.values[None, :], x.grid, spec.weight)[0])


def _draw_shifts(values: np.ndarray, grid: Grid, spec: AveragedKernelSpec, rng) -> np.ndarray:
    if isinstance(spec.action, CircularShift):
        return rng.uniform(0.0, spec.action.period, size=spec.S)
    mass = values ** 2
    total = mass.sum()
    if not total > 0:
        raise DegenerateSignal("window weight is zero for an identically zero signal")
    comp = rng.choice(grid.p, size=spec.S, p=mass / total)
    return -grid.points[comp] + spec.weight.c * rng.standard_normal(spec.S)


def sample_nu_x(x: DiscretizedSignal, spec: AveragedKernelSpec, rng, index: int = 0) -> OrbitSamples:
    """Draw ``S`` shifts from the orbit-local measure of ``x``."""
    spec.check_grid(x.grid)
    return OrbitSamples(index, _draw_shifts(x.values, x.grid, spec, rng), orbit_weight(x, spec))


def signal_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, int(index)])


def build_orbit_samples(pool: Sequence[DiscretizedSignal], spec: AveragedKernelSpec) -> list[OrbitSamples]:
    """One set of shifts per signal, seeded by ``(spec.rng_seed, index)``.

    Under the window weight, an identically zero signal gets weight 0 and
    zero shifts instead of raising; its kernel row vanishes.
    """
    if len(pool) == 0:
        raise ValueError("empty pool")
    grid = check_same_grid(*pool)
    spec.check_grid(grid)
    out = []
    for i, x in enumerate(pool):
        w = orbit_weight(x, spec)
        if isinstance(spec.weight, GaussianWindow) and w == 0:
            out.append(OrbitSamples(i, np.zeros(spec.S), 0.0))
            continue
        out.append(OrbitSamples(i, _draw_shifts(x.values, grid, spec, signal_rng(spec.rng_seed, i)), w))
    return out


def averaged_kernel_eval(spec: AveragedKernelSpec, x: DiscretizedSignal, sx: OrbitSamples,
                         y: DiscretizedSignal, sy: OrbitSamples) -> float:
    """Monte Carlo averaged kernel ``w(x) w(y) / S^2 * sum_rs k(x_gr, y_hs)``."""
    grid = check_same_grid(x, y)
    xs = shift_array(x.values, grid, sx.shifts, spec.mode)
    ys = shift_array(y.values, grid, sy.shifts, spec.mode)
    k = spec.base.from_sq_dists(pairwise_sq_dists(xs, ys, grid.step))
    return float(sx.weight * sy.weight * k.mean())


def averaged_gram_values(values: np.ndarray, grid: Grid, spec: AveragedKernelSpec,
                         shifts: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Pooled averaged Gram matrix from stacked values ``(N, p)`` and shifts ``(N, S)``."""
    N, S = shifts.shape
    feats = shift_array(values, grid, shifts, spec.mode).reshape(N * S, grid.p)
    k = spec.base.from_sq_dists(pairwise_sq_dists(feats, step=grid.step))
    K = k.reshape(N, S, N, S).mean(axis=(1, 3))
    K *= np.outer(weights, weights)
    return 0.5 * (K + K.T)


def averaged_gram(pool: Sequence[DiscretizedSignal], spec: AveragedKernelSpec,
                  samples: Sequence[OrbitSamples] | None = None) -> np.ndarray:
    grid, values = stack(pool)
    spec.check_grid(grid)
    if samples is None:
        samples = build_orbit_samples(pool, spec)
    shifts = np.stack([s.shifts for s in samples])
    weights = np.array([s.weight for s in samples])
    return averaged_gram_values(values, grid, spec, shifts, weights)


def exact_cyclic_average(base: GaussianKernel, x: DiscretizedSignal, y: DiscretizedSignal) -> float:
    """Average of the base kernel over all pairs of exact grid rotations.

    With the seam identified, a grid of ``p`` points carries ``p - 1``
    distinct rotations.
    """
    grid = check_same_grid(x, y)
    L = grid.p - 1
    idx = (np.arange(L)[None, :] - np.arange(L)[:, None]) % L
    idx = np.concatenate([idx, idx[:, :1]], axis=1)
    xr = x.values[:L][idx]
    yr = y.values[:L][idx]
    k = base.from_sq_dists(pairwise_sq_dists(xr, yr, grid.step))
    return float(k.mean())
