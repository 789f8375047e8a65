"""Phonocardiogram cycle extraction and the two real-data experiments.

Pipeline per recording: resample to 1 kHz, spectral-mask band-pass, sliding
RMS envelope, autocorrelation period ``T``.  One cycle ``[s, s + T)`` is then
cut from the envelope, starting either at the dominant envelope peak (S1
aligned) or at a uniform random position, and resampled to 128 points on
``[0, 1]`` whose endpoints are identified, so 127 samples are distinct.
"""
from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.io import wavfile

from .errors import BandInvalid, InsufficientData, NoValidStart, TooShort
from .procedures import METHODS, derive_seed, run_methods
from .signals import DiscretizedSignal, Grid, standardize

S1_ALIGNED = "s1"
RANDOM_START = "random"


@dataclass(frozen=True, eq=False)
class Recording:
    samples: np.ndarray
    sample_rate: float
    source_id: str = ""

    def __post_init__(self):
        v = np.asarray(self.samples, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("recording must be a non-empty 1-d array")
        if not np.all(np.isfinite(v)):
            raise ValueError("recording has non-finite samples")
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", v)

    @property
    def duration(self) -> float:
        """Time between the first and last sample."""
        return (len(self.samples) - 1) / self.sample_rate


@dataclass(frozen=True)
class ExtractionConfig:
    mode: str = S1_ALIGNED
    p: int = 128
    low: float = 25.0
    high: float = 400.0
    rms_window: float = 0.05
    bpm_range: tuple[float, float] = (40.0, 180.0)
    source: str = "envelope"  # or "signal", the band-passed waveform
    seed: int = 0

    def __post_init__(self):
        if self.mode not in (S1_ALIGNED, RANDOM_START):
            raise ValueError(f"mode must be {S1_ALIGNED!r} or {RANDOM_START!r}, got {self.mode!r}")
        if self.source not in ("envelope", "signal"):
            raise ValueError(f"source must be 'envelope' or 'signal', got {self.source!r}")
        if self.p < 2:
            raise ValueError("p must be at least 2")
        if not 0 < self.low < self.high:
            raise BandInvalid(f"need 0 < low < high, got [{self.low}, {self.high}]")
        lo, hi = self.bpm_range
        if not 0 < lo < hi:
            raise ValueError(f"need 0 < min bpm < max bpm, got {self.bpm_range}")
        if self.rms_window <= 0:
            raise ValueError("rms_window must be positive")


# -- I/O -------------------------------------------------------------------------

def read_wav(path) -> Recording:
    """Read a 16-bit PCM mono WAV file, scaled to [-1, 1)."""
    path = Path(path)
    try:
        rate, data = wavfile.read(path)
    except ValueError as e:
        raise ValueError(f"{path}: not a readable WAV file ({e})") from None
    if data.dtype != np.int16:
        raise ValueError(f"{path}: only 16-bit PCM is supported, got {data.dtype}")
    if data.ndim != 1:
        raise ValueError(f"{path}: only mono recordings are supported")
    return Recording(data.astype(float) / 32768.0, float(rate), path.stem)


def write_wav(path, rec: Recording) -> None:
    """Write as 16-bit PCM; samples are clipped to [-1, 1)."""
    rate = int(round(rec.sample_rate))
    if rate != rec.sample_rate:
        raise ValueError("WAV needs an integer sample rate")
    data = np.clip(np.round(rec.samples * 32768.0), -32768, 32767).astype(np.int16)
    wavfile.write(Path(path), rate, data)


def load_directory(path) -> list[Recording]:
    files = sorted(Path(path).glob("*.wav"))
    if not files:
        raise InsufficientData(f"no .wav files in {path}")
    return [read_wav(f) for f in files]


_LABELS = {"normal": "normal", "-1": "normal", "abnormal": "abnormal", "1": "abnormal"}


def read_labels(path) -> dict[str, str]:
    """Parse ``record_id,label`` rows; a header row is skipped."""
    out = {}
    with open(path, newline="") as f:
        for i, row in enumerate(csv.reader(f)):
            if not row or row[0].startswith("#"):
                continue
            if len(row) < 2:
                raise ValueError(f"{path}:{i + 1}: expected 'record_id,label'")
            rid, lab = row[0].strip(), row[1].strip().lower()
            if i == 0 and lab == "label":
                continue
            if lab not in _LABELS:
                raise ValueError(f"{path}:{i + 1}: unknown label {row[1]!r}")
            out[rid] = _LABELS[lab]
    return out


# -- preprocessing -------------------------------------------------------------

def resample_1khz(rec: Recording) -> Recording:
    if rec.sample_rate == 1000.0:
        return rec
    t_old = np.arange(len(rec.samples)) / rec.sample_rate
    n_new = int(np.floor(rec.duration * 1000.0 + 1e-9)) + 1
    t_new = np.arange(n_new) / 1000.0
    return Recording(np.interp(t_new, t_old, rec.samples), 1000.0, rec.source_id)


def bandpass(rec: Recording, low: float, high: float) -> Recording:
    """Zero-phase filter: keep FFT bins with ``low <= f <= high``."""
    if not 0 < low < high < rec.sample_rate / 2:
        raise BandInvalid(f"band [{low}, {high}] Hz invalid for rate {rec.sample_rate} Hz")
    n = len(rec.samples)
    spec = np.fft.rfft(rec.samples)
    f = np.fft.rfftfreq(n, 1.0 / rec.sample_rate)
    spec[(f < low) | (f > high)] = 0.0
    return Recording(np.fft.irfft(spec, n), rec.sample_rate, rec.source_id)


def window_samples(rec: Recording, window_s: float) -> int:
    w = int(round(window_s * rec.sample_rate))
    if w < 1:
        raise ValueError(f"RMS window {window_s} s is shorter than one sample")
    return w


def rms_envelope(rec: Recording, window_s: float) -> Recording:
    """Centred sliding RMS; windows are truncated at the edges."""
    w = window_samples(rec, window_s)
    x2 = rec.samples ** 2
    n = len(x2)
    c = np.concatenate([[0.0], np.cumsum(x2)])
    k = np.arange(n)
    lo = np.maximum(k - (w - 1) // 2, 0)
    hi = np.minimum(k + w // 2 + 1, n)
    ms = (c[hi] - c[lo]) / (hi - lo)
    return Recording(np.sqrt(np.maximum(ms, 0.0)), rec.sample_rate, rec.source_id)


@dataclass(frozen=True)
class PeriodEstimate:
    period: float
    lag: int
    peak: float
    low_confidence: bool

    def __float__(self):
        return self.period


def lag_range(sample_rate: float, bpm_range) -> tuple[int, int]:
    lo_bpm, hi_bpm = bpm_range
    if not 0 < lo_bpm < hi_bpm:
        raise ValueError(f"need 0 < min bpm < max bpm, got {bpm_range}")
    lo = max(1, int(np.ceil(60.0 / hi_bpm * sample_rate - 1e-9)))
    hi = int(np.floor(60.0 / lo_bpm * sample_rate + 1e-9))
    return lo, hi


def estimate_period(env: Recording, bpm_range=(40.0, 180.0)) -> PeriodEstimate:
    """Lag in the heart-rate window maximising the biased autocorrelation.

    Ties go to the smallest lag.  The estimate is flagged low-confidence
    when the normalised peak is below 0.2.
    """
    lo, hi = lag_range(env.sample_rate, bpm_range)
    x = env.samples - env.samples.mean()
    n = len(x)
    if n < 2 * hi:
        raise TooShort(f"envelope of {n} samples cannot cover twice the max lag {hi}")
    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(x, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[:hi + 1] / n
    r = acov / acov[0] if acov[0] > 0 else np.zeros_like(acov)
    seg = r[lo:hi + 1]
    # FFT round-off can split exact ties; treat near-equal values as tied
    best = int(np.flatnonzero(seg >= seg.max() - 1e-12)[0])
    lag = lo + best
    peak = float(seg[best])
    return PeriodEstimate(lag / env.sample_rate, lag, peak, peak < 0.2)


@dataclass(frozen=True, eq=False)
class Prepared:
    """A recording after preprocessing, ready for repeated extraction."""
    signal: Recording
    envelope: Recording
    period: PeriodEstimate


def preprocess(rec: Recording, cfg: ExtractionConfig = ExtractionConfig()) -> Prepared:
    r = resample_1khz(rec)
    filt = bandpass(r, cfg.low, cfg.high)
    env = rms_envelope(filt, cfg.rms_window)
    return Prepared(filt, env, estimate_period(env, cfg.bpm_range))


def preprocess_all(recs: Sequence[Recording], cfg: ExtractionConfig = ExtractionConfig(),
                   threads: int | None = 1) -> list[Prepared]:
    if threads is not None and threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(preprocess, recs, [cfg] * len(recs)))
    return [preprocess(r, cfg) for r in recs]


# -- extraction ----------------------------------------------------------------

def s1_index(env: Recording, span: float, edge: int = 0) -> int:
    """Highest local envelope maximum with ``span`` samples after it.

    Peaks within ``edge`` samples of either end are ignored; the edge
    windows of the envelope are truncated and unreliable.  Ties go to the
    earliest peak.
    """
    e = env.samples
    n = len(e)
    last = int(np.floor(n - 1 - span + 1e-9))
    k = np.arange(1, n - 1)
    peaks = k[(e[k] >= e[k - 1]) & (e[k] > e[k + 1])]
    peaks = peaks[(peaks >= edge) & (peaks <= min(last, n - 1 - edge))]
    if peaks.size == 0:
        raise NoValidStart(f"{env.source_id or 'recording'}: no envelope peak with a full period after it")
    return int(peaks[np.argmax(e[peaks])])


def extract_cycle(rec: Recording, env: Recording, period: float, cfg: ExtractionConfig = ExtractionConfig(),
                  rng=None) -> DiscretizedSignal:
    """One standardized cycle on ``Grid(0, 1, p)``.

    ``rec`` and ``env`` share a sample rate; ``cfg.source`` picks which one
    is cut.  ``rng`` is only used in random-start mode.
    """
    if rec.sample_rate != env.sample_rate or len(rec.samples) != len(env.samples):
        raise ValueError("recording and envelope must share sample rate and length")
    period = float(period)
    fs = env.sample_rate
    span = period * fs
    n = len(env.samples)
    if span <= 0 or span > n - 1:
        raise NoValidStart(f"period {period} s does not fit in a {rec.duration:.3f} s recording")
    if cfg.mode == S1_ALIGNED:
        start = s1_index(env, span, edge=window_samples(env, cfg.rms_window) // 2)
    else:
        if rng is None:
            rng = np.random.default_rng(cfg.seed)
        n_start = int(np.floor(n - 1 - span + 1e-9)) + 1
        start = int(rng.integers(n_start))
    src = env if cfg.source == "envelope" else rec
    # p - 1 distinct samples of [s, s + T); the last grid point is the seam
    pos = start + span * np.arange(cfg.p - 1) / (cfg.p - 1)
    values = np.interp(pos, np.arange(n), src.samples)
    values = np.append(values, values[0])
    return standardize(DiscretizedSignal(Grid(0.0, 1.0, cfg.p), values), periodic=True)


def extract(prep: Prepared, cfg: ExtractionConfig, rng=None) -> DiscretizedSignal:
    return extract_cycle(prep.signal, prep.envelope, prep.period.period, cfg, rng)


# -- experiments ---------------------------------------------------------------

@dataclass(frozen=True)
class TestConfig:
    S: int = 16
    B: int = 200
    alpha: float = 0.05
    n_rep: int = 300
    seed: int = 0
    methods: tuple[str, ...] = METHODS
    sigma: float | None = None

    __test__ = False


@dataclass
class PcgResult:
    n_values: tuple[int, ...]
    n_rep: int
    rejections: dict[tuple[int, str], int]
    methods: tuple[str, ...] = METHODS
    seconds: dict[tuple[int, str], float] = field(default_factory=dict, compare=False)

    def rate(self, n: int, method: str) -> float:
        return self.rejections[(n, method)] / self.n_rep

    def mc_se(self, n: int, method: str) -> float:
        r = self.rate(n, method)
        return float(np.sqrt(r * (1 - r) / self.n_rep))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "method", "reject_rate", "mc_se"])
        for n in self.n_values:
            for m in self.methods:
                w.writerow([n, m, f"{self.rate(n, m):.6f}", f"{self.mc_se(n, m):.6f}"])
        return buf.getvalue()


def _run(pool_x: Sequence[Prepared], pool_y: Sequence[Prepared] | None, n_values, xcfg: ExtractionConfig,
         ycfg: ExtractionConfig, test: TestConfig) -> PcgResult:
    """Shared loop.  With ``pool_y`` None, X and Y are disjoint draws from ``pool_x``."""
    n_values = tuple(int(n) for n in n_values)
    methods = tuple(m for m in METHODS if m in test.methods)
    for n in n_values:
        if n < 2:
            raise ValueError(f"sample size must be at least 2, got {n}")
        if pool_y is None and 2 * n > len(pool_x):
            raise InsufficientData(f"n={n} needs {2 * n} recordings, have {len(pool_x)}")
        if pool_y is not None and (n > len(pool_x) or n > len(pool_y)):
            raise InsufficientData(f"n={n} exceeds a label group ({len(pool_x)}, {len(pool_y)})")
    grid = Grid(0.0, 1.0, xcfg.p)
    rejections = {(n, m): 0 for n in n_values for m in methods}
    seconds = {(n, m): 0.0 for n in n_values for m in methods}
    for j, n in enumerate(n_values):
        for r in range(test.n_rep):
            seed = derive_seed(test.seed, j, r)
            rng = np.random.default_rng([seed, 0])
            if pool_y is None:
                idx = rng.choice(len(pool_x), 2 * n, replace=False)
                xs, ys = [pool_x[i] for i in idx[:n]], [pool_x[i] for i in idx[n:]]
            else:
                xs = [pool_x[i] for i in rng.choice(len(pool_x), n, replace=False)]
                ys = [pool_y[i] for i in rng.choice(len(pool_y), n, replace=False)]
            X = np.array([extract(p, xcfg, rng).values for p in xs])
            Y = np.array([extract(p, ycfg, rng).values for p in ys])
            out = run_methods(X, Y, grid, "periodic", S=test.S, B=test.B, alpha=test.alpha, seed=seed,
                              methods=methods, sigma=test.sigma)
            for m in methods:
                rejections[(n, m)] += int(out.reports[m].reject)
                seconds[(n, m)] += out.seconds[m]
    return PcgResult(n_values, test.n_rep, rejections, methods, seconds)


def misalignment_experiment(prepared: Sequence[Prepared], n_values, cfg: ExtractionConfig = ExtractionConfig(),
                            test: TestConfig = TestConfig()) -> PcgResult:
    """S1-aligned X against random-start Y from ``2n`` distinct recordings."""
    return _run(prepared, None, n_values, replace(cfg, mode=S1_ALIGNED), replace(cfg, mode=RANDOM_START), test)


def label_experiment(normal: Sequence[Prepared], abnormal: Sequence[Prepared], n_values,
                     cfg: ExtractionConfig = ExtractionConfig(), test: TestConfig = TestConfig()) -> PcgResult:
    """S1-aligned cycles from normal against abnormal recordings."""
    c = replace(cfg, mode=S1_ALIGNED)
    return _run(normal, abnormal, n_values, c, c, test)


# -- synthetic corpus ----------------------------------------------------------

def _burst(u, centre, width, freq, amp):
    d = np.mod(u - centre + 0.5, 1.0) - 0.5
    return amp * np.exp(-0.5 * (d / width) ** 2) * np.sin(2 * np.pi * freq * d)


def cycle_template(u, s2_ratio: float = 0.6, s2_at: float = 0.4):
    """Heart-sound-like cycle on ``u`` in [0, 1): two tone bursts (S1 and S2)."""
    u = np.mod(u, 1.0)
    return _burst(u, 0.1, 0.02, 40.0, 1.0) + _burst(u, 0.1 + s2_at, 0.015, 55.0, s2_ratio)


def synthetic_recording(rng, period: float = 0.8, duration: float = 5.0, sample_rate: float = 1000.0,
                        beat_amp: float = 0.2, murmur_sd: float = 1.0, gaps: int = 2, gap_width: float = 0.06,
                        noise_sd: float = 0.02, jitter: bool = True, source_id: str = "",
                        **shape) -> Recording:
    """Identical cycles with a uniform random phase plus white noise.

    Each cycle is ``beat_amp`` times the S1/S2 template plus a murmur: a
    white waveform of sd ``murmur_sd`` silenced in ``gaps`` smooth gaps at
    random positions.  Template jitter (S2 position and size), the murmur
    and its gaps are drawn once per recording and repeated, so all cycles
    of one recording agree up to the additive ``noise_sd`` noise.
    """
    t = np.arange(int(round(duration * sample_rate)) + 1) / sample_rate
    if jitter:
        shape = {"s2_at": rng.uniform(0.25, 0.65), "s2_ratio": rng.uniform(0.3, 0.9), **shape}
    phase = rng.uniform()
    u = np.mod(t / period + phase, 1.0)
    x = beat_amp * cycle_template(u, **shape)
    if murmur_sd > 0:
        L = int(round(period * sample_rate))
        v = np.arange(L) / L
        w = murmur_sd * rng.standard_normal(L)
        for c in rng.uniform(size=gaps):
            d = np.mod(v - c + 0.5, 1.0) - 0.5
            w *= 1.0 - np.exp(-0.5 * (d / gap_width) ** 2)
        x = x + np.interp(u * L, np.arange(L + 1), np.append(w, w[0]))
    x = x + noise_sd * rng.standard_normal(len(t))
    return Recording(0.5 * x, sample_rate, source_id)


def synthetic_corpus(count: int, seed: int = 0, **kwargs) -> list[Recording]:
    rng = np.random.default_rng(seed)
    return [synthetic_recording(rng, source_id=f"syn{i:04d}", **kwargs) for i in range(count)]
