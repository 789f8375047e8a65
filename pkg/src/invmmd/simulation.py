"""Synthetic shifted-signal scenarios and the rejection-rate experiment.

Signals are ``gamma * h(t - theta) * eps`` with log-normal amplitude
``gamma``, Gaussian phase ``theta`` and multiplicative white noise ``eps``
with mean 1.  Under H0 the two samples differ only through the phase
distribution; under H1 the second sample uses a perturbed shape.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
import numpy as np

from .group_average import select_c  # noqa: F401  (re-exported)
from .procedures import METHODS, SETTINGS, derive_seed, run_methods
from .signals import DiscretizedSignal, Grid, unstack

TWO_PI = 2.0 * np.pi
APERIODIC_WINDOW = (-5.0, 5.0)
DEFAULT_DELTAS = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)


def periodic_grid(p: int = 128) -> Grid:
    return Grid(0.0, TWO_PI, p)


def aperiodic_grid(p: int = 128) -> Grid:
    return Grid(*APERIODIC_WINDOW, p)


def two_bump(t):
    return np.exp(-2.0 * (t - 1.0) ** 2) + 0.4 * np.exp(-((t + 1.0) ** 2) / 2.0)


def _check_args(hyp: str, group: str, delta: float) -> None:
    if hyp not in ("H0", "H1"):
        raise ValueError(f"hypothesis must be 'H0' or 'H1', got {hyp!r}")
    if group not in ("X", "Y"):
        raise ValueError(f"group must be 'X' or 'Y', got {group!r}")
    if delta < 0:
        raise ValueError(f"delta must be non-negative, got {delta}")


def _draw(n: int, p: int, theta_mean: float, rng, sigma_gamma, theta_sd, noise_sd):
    gamma = np.exp(sigma_gamma * rng.standard_normal(n))
    theta = theta_mean + theta_sd * rng.standard_normal(n)
    eps = 1.0 + noise_sd * rng.standard_normal((n, p))
    return gamma, theta, eps


def gen_periodic_values(hyp: str, delta: float, n: int, rng, group: str = "X", p: int = 128,
                        sigma_gamma: float = 0.2, theta_sd: float = 0.8,
                        noise_sd: float = 0.8) -> np.ndarray:
    _check_args(hyp, group, delta)
    t = periodic_grid(p).points[:-1]
    theta_mean = (delta / 2 if group == "X" else -delta / 2) if hyp == "H0" else 0.0
    gamma, theta, eps = _draw(n, p - 1, theta_mean, rng, sigma_gamma, theta_sd, noise_sd)
    u = np.mod(t[None, :] - np.mod(theta, TWO_PI)[:, None], TWO_PI)
    h = np.sin(u)
    if hyp == "H1" and group == "Y":
        h = h + delta * np.sin(2.0 * u + 0.3)
    core = gamma[:, None] * h * eps
    # t_p and t_1 are the same point of the circle
    return np.concatenate([core, core[:, :1]], axis=1)


def gen_periodic(hyp: str, delta: float, n: int, rng, group: str = "X", p: int = 128,
                 **params) -> list[DiscretizedSignal]:
    """Sample ``n`` noisy shifted sinusoids on ``[0, 2 pi]``.

    ``group`` selects the X or Y law of the scenario.  Setting
    ``sigma_gamma``, ``theta_sd`` or ``noise_sd`` to zero freezes the
    corresponding factor.
    """
    return unstack(periodic_grid(p), gen_periodic_values(hyp, delta, n, rng, group, p, **params))


def gen_aperiodic_values(hyp: str, delta: float, n: int, rng, group: str = "X", p: int = 128,
                         sigma_gamma: float = 0.2, theta_sd: float = 0.8,
                         noise_sd: float = 0.8) -> np.ndarray:
    _check_args(hyp, group, delta)
    t = aperiodic_grid(p).points
    theta_mean = (delta / 2 if group == "X" else -delta / 2) if hyp == "H0" else 0.0
    gamma, theta, eps = _draw(n, p, theta_mean, rng, sigma_gamma, theta_sd, noise_sd)
    u = t[None, :] - theta[:, None]
    h = np.exp(-2.0 * u ** 2)
    if hyp == "H1" and group == "Y":
        h = h + delta / 4.0 * two_bump(u)
    return gamma[:, None] * h * eps


def gen_aperiodic(hyp: str, delta: float, n: int, rng, group: str = "X", p: int = 128,
                  **params) -> list[DiscretizedSignal]:
    """Sample ``n`` noisy translated bumps observed on ``[-5, 5]``."""
    return unstack(aperiodic_grid(p), gen_aperiodic_values(hyp, delta, n, rng, group, p, **params))


@dataclass(frozen=True)
class ScenarioConfig:
    setting: str = "periodic"
    hypothesis: str = "H0"
    delta_grid: tuple[float, ...] = DEFAULT_DELTAS
    n: int = 20
    m: int = 20
    p: int = 128
    n_rep: int = 300
    S: int = 16
    B: int = 200
    alpha: float = 0.05
    seed: int = 0
    sigma_gamma: float = 0.2

    def __post_init__(self):
        object.__setattr__(self, "delta_grid", tuple(float(d) for d in self.delta_grid))
        if self.setting not in SETTINGS:
            raise ValueError(f"setting must be one of {SETTINGS}, got {self.setting!r}")
        if self.hypothesis not in ("H0", "H1"):
            raise ValueError(f"hypothesis must be H0 or H1, got {self.hypothesis!r}")
        if not self.delta_grid or min(self.delta_grid) < 0:
            raise ValueError("delta_grid must be a non-empty list of non-negative values")
        for name in ("n", "m", "p", "n_rep", "S", "B"):
            if int(getattr(self, name)) != getattr(self, name) or getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.n < 2 or self.m < 2 or self.p < 2:
            raise ValueError("n, m and p must be at least 2")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.seed < 0 or self.sigma_gamma < 0:
            raise ValueError("seed and sigma_gamma must be non-negative")

    # JSON key -> field name
    _JSON_KEYS = {"s_budget": "S", "b_perms": "B"}

    @classmethod
    def from_dict(cls, d: dict) -> ScenarioConfig:
        names = {f.name for f in fields(cls)}
        kwargs = {}
        for key, value in d.items():
            name = cls._JSON_KEYS.get(key, key)
            if name not in names:
                raise ValueError(f"unknown config key {key!r}")
            kwargs[name] = value
        return cls(**kwargs)

    @classmethod
    def from_json(cls, text: str) -> ScenarioConfig:
        d = json.loads(text)
        if not isinstance(d, dict):
            raise ValueError("config must be a JSON object")
        return cls.from_dict(d)

    def to_dict(self) -> dict:
        inv = {v: k for k, v in self._JSON_KEYS.items()}
        return {inv.get(k, k): (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self).items()}

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class ExperimentResult:
    """Rejection counts per ``(delta, method)``.

    Equality ignores timings so that reruns with one seed compare equal.
    """
    config: ScenarioConfig
    rejections: dict[tuple[float, str], int]
    seconds: dict[tuple[float, str], float] = field(default_factory=dict, compare=False)
    methods: tuple[str, ...] = METHODS

    def rate(self, delta: float, method: str) -> float:
        return self.rejections[(float(delta), method)] / self.config.n_rep

    def mc_se(self, delta: float, method: str) -> float:
        r = self.rate(delta, method)
        return float(np.sqrt(r * (1.0 - r) / self.config.n_rep))

    def rows(self):
        for d in self.config.delta_grid:
            for method in self.methods:
                yield d, method, self.rate(d, method), self.mc_se(d, method), self.seconds.get((d, method))

    def to_csv(self, timings: bool = False) -> str:
        """CSV ``delta,method,reject_rate,mc_se,seconds``.

        The seconds column is left empty unless ``timings`` is set, which
        keeps the output byte-identical across reruns.
        """
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["delta", "method", "reject_rate", "mc_se", "seconds"])
        for d, method, rate, se, sec in self.rows():
            w.writerow([f"{d:g}", method, f"{rate:.6f}", f"{se:.6f}",
                        f"{sec:.3f}" if timings and sec is not None else ""])
        return buf.getvalue()


def generate_pair(cfg: ScenarioConfig, delta: float, rng) -> tuple[Grid, np.ndarray, np.ndarray]:
    if cfg.setting == "periodic":
        gen, grid = gen_periodic_values, periodic_grid(cfg.p)
    else:
        gen, grid = gen_aperiodic_values, aperiodic_grid(cfg.p)
    X = gen(cfg.hypothesis, delta, cfg.n, rng, "X", cfg.p, sigma_gamma=cfg.sigma_gamma)
    Y = gen(cfg.hypothesis, delta, cfg.m, rng, "Y", cfg.p, sigma_gamma=cfg.sigma_gamma)
    return grid, X, Y


def run_repetition(cfg: ScenarioConfig, delta_index: int, rep: int, methods=METHODS):
    """One repetition: returns ``{method: (reject, seconds)}``."""
    seed = derive_seed(cfg.seed, delta_index, rep)
    delta = cfg.delta_grid[delta_index]
    grid, X, Y = generate_pair(cfg, delta, np.random.default_rng([seed, 0]))
    out = run_methods(X, Y, grid, cfg.setting, S=cfg.S, B=cfg.B, alpha=cfg.alpha, seed=seed, methods=methods)
    return {m: (out.reports[m].reject, out.seconds[m]) for m in methods}


def _run_task(args):
    return run_repetition(*args)


def run_experiment(cfg: ScenarioConfig, threads: int | None = 1, methods=METHODS) -> ExperimentResult:
    """Estimate rejection rates of the tests over the delta grid.

    Repetitions are independent and seeded from ``(seed, delta index,
    repetition)``, so results do not depend on ``threads``.  A method's
    outcome does not depend on which other methods run alongside it.
    """
    methods = tuple(m for m in METHODS if m in methods)
    tasks = [(cfg, j, r, methods) for j in range(len(cfg.delta_grid)) for r in range(cfg.n_rep)]
    if threads is not None and threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            outcomes = list(ex.map(_run_task, tasks, chunksize=16))
    else:
        outcomes = [_run_task(t) for t in tasks]
    rejections = {(d, m): 0 for d in cfg.delta_grid for m in methods}
    seconds = {(d, m): 0.0 for d in cfg.delta_grid for m in methods}
    for (_, j, _, _), res in zip(tasks, outcomes):
        d = cfg.delta_grid[j]
        for m, (rej, sec) in res.items():
            rejections[(d, m)] += int(rej)
            seconds[(d, m)] += sec
    return ExperimentResult(cfg, rejections, seconds, methods)

