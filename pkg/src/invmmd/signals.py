"""Discretized signals on uniform grids.

A signal is a vector of samples ``x(t_1), ..., x(t_p)`` on the grid
``t_k = a + (k - 1)(b - a)/(p - 1)``.  Squared norms use the rectangle rule
``(b - a)/(p - 1) * sum(x**2)``.

Two shift conventions are supported.  ``PERIODIC_WRAP`` treats the signal as
``(b - a)``-periodic with the last grid point identified with the first, so
only the first ``p - 1`` samples carry information during a shift.
``ZERO_PAD`` extends the signal by zero outside ``[a, b]``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import GridMismatch, ZeroVariance

# fractional positions this close to an integer are snapped to it
_SNAP = 1e-9


@dataclass(frozen=True)
class Grid:
    a: float
    b: float
    p: int

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or self.b <= self.a:
            raise ValueError(f"grid needs a < b, got a={self.a}, b={self.b}")
        if int(self.p) != self.p or self.p < 2:
            raise ValueError(f"grid needs p >= 2 points, got {self.p}")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "p", int(self.p))

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.p)

    @property
    def step(self) -> float:
        return (self.b - self.a) / (self.p - 1)

    @property
    def length(self) -> float:
        return self.b - self.a


class ShiftMode(enum.Enum):
    PERIODIC_WRAP = "periodic"
    ZERO_PAD = "zero"


@dataclass(frozen=True, eq=False)
class DiscretizedSignal:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.p,):
            raise ValueError(f"expected {self.grid.p} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("signal values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.grid.p

    def __sub__(self, other: DiscretizedSignal) -> DiscretizedSignal:
        check_same_grid(self, other)
        return DiscretizedSignal(self.grid, self.values - other.values)

    def __mul__(self, scale: float) -> DiscretizedSignal:
        return DiscretizedSignal(self.grid, self.values * scale)

    __rmul__ = __mul__


def check_same_grid(*signals: DiscretizedSignal) -> Grid:
    grid = signals[0].grid
    for s in signals[1:]:
        if s.grid != grid:
            raise GridMismatch(f"grids differ: {grid} vs {s.grid}")
    return grid


def stack(pool: Sequence[DiscretizedSignal]) -> tuple[Grid, np.ndarray]:
    """Return the shared grid and an ``(N, p)`` array of values."""
    if len(pool) == 0:
        raise ValueError("empty pool")
    grid = check_same_grid(*pool)
    return grid, np.stack([s.values for s in pool])


def unstack(grid: Grid, values: np.ndarray) -> list[DiscretizedSignal]:
    return [DiscretizedSignal(grid, row) for row in np.atleast_2d(values)]


def l2_norm_sq(x: DiscretizedSignal) -> float:
    return float(x.grid.step * np.dot(x.values, x.values))


def l2_dist(x: DiscretizedSignal, y: DiscretizedSignal) -> float:
    check_same_grid(x, y)
    return float(np.sqrt(l2_norm_sq(x - y)))


def _snap(pos: np.ndarray) -> np.ndarray:
    r = np.rint(pos)
    return np.where(np.abs(pos - r) < _SNAP, r, pos)


def shift_array(values: np.ndarray, grid: Grid, shifts, mode: ShiftMode) -> np.ndarray:
    """Vectorized ``x(. - t)`` by linear interpolation.

    ``values`` has shape ``(..., p)`` and ``shifts`` shape ``(..., S)`` with
    matching leading dimensions; the result has shape ``(..., S, p)``.
    """
    values = np.asarray(values, dtype=float)
    shifts = np.asarray(shifts, dtype=float)
    p = grid.p
    offsets = np.arange(p) * grid.step  # t_k - a
    src = offsets - shifts[..., None]
    if mode is ShiftMode.PERIODIC_WRAP:
        n_cyc = p - 1
        pos = _snap(np.mod(src, grid.length) / grid.step)
        lo = np.floor(pos)
        frac = pos - lo
        i0 = lo.astype(np.intp) % n_cyc
        i1 = (i0 + 1) % n_cyc
        v = np.broadcast_to(values[..., None, :n_cyc], i0.shape[:-1] + (n_cyc,))
        return (np.take_along_axis(v, i0, axis=-1) * (1.0 - frac)
                + np.take_along_axis(v, i1, axis=-1) * frac)
    if mode is ShiftMode.ZERO_PAD:
        pos = _snap(src / grid.step)
        inside = (pos >= 0) & (pos <= p - 1)
        i0 = np.clip(np.floor(pos), 0, p - 2).astype(np.intp)
        frac = np.where(inside, pos - i0, 0.0)
        v = np.broadcast_to(values[..., None, :], i0.shape[:-1] + (p,))
        out = (np.take_along_axis(v, i0, axis=-1) * (1.0 - frac)
               + np.take_along_axis(v, i0 + 1, axis=-1) * frac)
        return np.where(inside, out, 0.0)
    raise ValueError(f"unknown shift mode {mode!r}")


def grid_shift_array(values: np.ndarray, grid: Grid, steps, mode: ShiftMode) -> np.ndarray:
    """Exact shifts by integer numbers of grid steps, ``(N, p) -> (N, C, p)``."""
    values = np.asarray(values, dtype=float)
    steps = np.asarray(steps, dtype=np.intp)
    src = np.arange(grid.p)[None, :] - steps[:, None]
    if mode is ShiftMode.PERIODIC_WRAP:
        src = src % (grid.p - 1)
        return values[..., src]
    inside = (src >= 0) & (src < grid.p)
    return np.where(inside, values[..., np.clip(src, 0, grid.p - 1)], 0.0)


def shift(x: DiscretizedSignal, t: float, mode: ShiftMode) -> DiscretizedSignal:
    """Return the signal ``u -> x(u - t)`` sampled on the same grid."""
    out = shift_array(x.values, x.grid, np.array([t]), mode)[0]
    return DiscretizedSignal(x.grid, out)


def rotate(x: DiscretizedSignal, r: int) -> DiscretizedSignal:
    """Exact periodic shift by ``r`` grid steps."""
    core = np.roll(x.values[:-1], r)
    return DiscretizedSignal(x.grid, np.append(core, core[0]))


def standardize(x: DiscretizedSignal, periodic: bool = False) -> DiscretizedSignal:
    """Zero mean, unit population standard deviation over the p samples.

    With ``periodic`` the statistics use the p - 1 distinct samples only,
    so the duplicated seam sample is not counted twice.
    """
    v = x.values
    ref = v[:-1] if periodic else v
    if np.ptp(ref) == 0:
        raise ZeroVariance("cannot standardize a constant signal")
    return DiscretizedSignal(x.grid, (v - ref.mean()) / ref.std())


def write_signal_csv(path, signals: Sequence[DiscretizedSignal]) -> None:
    grid, values = stack(signals)
    lines = [f"# grid {grid.a!r} {grid.b!r} {grid.p}"]
    lines += [",".join(repr(float(v)) for v in row) for row in values]
    Path(path).write_text("\n".join(lines) + "\n")


def read_signal_csv(path) -> list[DiscretizedSignal]:
    """Read signals written by :func:`write_signal_csv`."""
    grid = None
    rows: list[list[float]] = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if parts and parts[0] == "grid":
                if len(parts) != 4:
                    raise ValueError(f"{path}:{lineno}: malformed grid header")
                grid = Grid(float(parts[1]), float(parts[2]), int(parts[3]))
            continue
        rows.append([float(tok) for tok in line.split(",")])
    if grid is None:
        raise ValueError(f"{path}: missing '# grid a b p' header")
    return [DiscretizedSignal(grid, row) for row in rows]

