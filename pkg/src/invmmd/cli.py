"""Command-line entry point.

    invmmd simulate CONFIG.json [-o results.csv]
    invmmd test X.csv Y.csv --method invariant --setting periodic
    invmmd pcg {synth,extract,misalign,labels} ...
    invmmd plot results.csv figure.svg

Exit codes: 0 success, 2 input or configuration error, 3 data error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import BandInvalid, InvMMDError
from .plotting import read_rates, render_svg
from .procedures import METHODS, SETTINGS, run_methods

EXIT_OK, EXIT_INPUT, EXIT_DATA = 0, 2, 3


class InputError(Exception):
    """Unreadable or invalid user input (exit code 2)."""


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _common_test_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--S", type=_positive_int, default=16, help="orbit samples per signal (default 16)")
    p.add_argument("--B", type=_positive_int, default=200, help="permutations (default 200)")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)


# -- simulate ------------------------------------------------------------------

def cmd_simulate(args) -> int:
    from .simulation import ScenarioConfig, run_experiment

    try:
        text = Path(args.config).read_text()
    except OSError as e:
        raise InputError(f"cannot read config: {e}") from None
    try:
        cfg = ScenarioConfig.from_json(text)
    except (json.JSONDecodeError, TypeError, ValueError) as e:
        raise InputError(f"invalid config {args.config}: {e}") from None
    res = run_experiment(cfg, threads=args.threads)
    manifest = f"# invmmd version={__version__} seed={cfg.seed} config_sha256={cfg.digest()}\n"
    _emit(manifest + res.to_csv(timings=args.timings), args.output)
    return EXIT_OK


# -- test ------------------------------------------------------------------------

def _read_sample(path):
    from .signals import read_signal_csv

    try:
        return read_signal_csv(path)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from None
    except InvMMDError:
        raise
    except ValueError as e:
        raise InputError(f"{path}: {e}") from None


def cmd_test(args) -> int:
    from .signals import check_same_grid, stack

    X, Y = _read_sample(args.x), _read_sample(args.y)
    grid = check_same_grid(*X, *Y)
    if args.sigma is not None and not args.sigma > 0:
        raise InputError("--sigma must be positive")
    if args.c is not None and not args.c > 0:
        raise InputError("--c must be positive")
    from .errors import SampleTooSmall
    if len(X) < 2 or len(Y) < 2:
        raise SampleTooSmall(f"need at least two signals per sample, got {len(X)} and {len(Y)}")
    out = run_methods(stack(X)[1], stack(Y)[1], grid, args.setting, S=args.S, B=args.B, alpha=args.alpha,
                      seed=args.seed, methods=(args.method,), sigma=args.sigma, c=args.c)
    rep = out.reports[args.method]
    doc = {"mmd2": rep.mmd2, "p_value": rep.p_value, "reject": rep.reject, "method": args.method,
           "setting": args.setting, "sigma": out.sigma}
    if out.c is not None:
        doc["c"] = out.c
    doc.update({"S": args.S, "B": args.B, "alpha": args.alpha, "seed": args.seed})
    print(json.dumps(doc))
    return EXIT_OK


# -- pcg -----------------------------------------------------------------------

def _extraction_config(args):
    from .pcg import ExtractionConfig

    return ExtractionConfig(low=args.low, high=args.high, rms_window=args.rms_window,
                            bpm_range=(args.min_bpm, args.max_bpm), source=args.source, seed=args.seed)


def _load(directory, cfg, threads):
    from .pcg import load_directory, preprocess_all

    if not Path(directory).is_dir():
        raise InputError(f"not a directory: {directory}")
    try:
        recs = load_directory(directory)
    except InvMMDError:
        raise
    except ValueError as e:
        raise InputError(str(e)) from None
    return recs, preprocess_all(recs, cfg, threads)


def _test_config(args):
    from .pcg import TestConfig

    return TestConfig(S=args.S, B=args.B, alpha=args.alpha, n_rep=args.reps, seed=args.seed)


def cmd_pcg(args) -> int:
    from . import pcg

    if args.pcg_cmd == "synth":
        out = Path(args.outdir)
        out.mkdir(parents=True, exist_ok=True)
        recs = pcg.synthetic_corpus(args.count, seed=args.seed, period=args.period, duration=args.duration)
        for r in recs:
            pcg.write_wav(out / f"{r.source_id}.wav", r)
        print(f"# invmmd version={__version__} seed={args.seed}\nwrote {len(recs)} recordings to {out}")
        return EXIT_OK

    cfg = _extraction_config(args)
    if args.pcg_cmd == "extract":
        from dataclasses import replace
        from .signals import write_signal_csv

        cfg = replace(cfg, mode=args.mode)
        _, prepared = _load(args.directory, cfg, args.threads)
        rng = np.random.default_rng(args.seed)
        cycles = [pcg.extract(p, cfg, rng) for p in prepared]
        write_signal_csv(args.output, cycles)
        return EXIT_OK

    test = _test_config(args)
    header = f"# invmmd version={__version__} seed={args.seed}\n"
    if args.pcg_cmd == "misalign":
        _, prepared = _load(args.directory, cfg, args.threads)
        res = pcg.misalignment_experiment(prepared, args.n, cfg, test)
    else:
        try:
            labels = pcg.read_labels(args.labels)
        except OSError as e:
            raise InputError(f"cannot read labels: {e}") from None
        except ValueError as e:
            raise InputError(str(e)) from None
        recs, prepared = _load(args.directory, cfg, args.threads)
        missing = [r.source_id for r in recs if r.source_id not in labels]
        if missing:
            raise InputError(f"no label for recordings: {', '.join(missing[:5])}")
        normal = [p for r, p in zip(recs, prepared) if labels[r.source_id] == "normal"]
        abnormal = [p for r, p in zip(recs, prepared) if labels[r.source_id] == "abnormal"]
        res = pcg.label_experiment(normal, abnormal, args.n, cfg, test)
    _emit(header + res.to_csv(), args.output)
    return EXIT_OK


# -- plot ------------------------------------------------------------------------

def cmd_plot(args) -> int:
    try:
        x_col, series = read_rates(args.csv)
    except OSError as e:
        raise InputError(f"cannot read {args.csv}: {e}") from None
    except (ValueError, KeyError) as e:
        raise InputError(str(e)) from None
    svg = render_svg(series, xlabel=args.xlabel or x_col, ylabel=args.ylabel, title=args.title,
                     alpha=args.alpha)
    Path(args.svg).write_text(svg)
    return EXIT_OK


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="invmmd", description="Group-invariant kernel two-sample tests.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)
    threads = dict(type=_positive_int, default=os.cpu_count() or 1, help="worker processes (default: all cores)")

    p = sub.add_parser("simulate", help="run a rejection-rate experiment from a JSON config")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="CSV path (default stdout)")
    p.add_argument("--threads", **threads)
    p.add_argument("--timings", action="store_true", help="fill the seconds column (output no longer byte-stable)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("test", help="test two samples stored as signal CSV files")
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("--method", choices=METHODS, default="invariant")
    p.add_argument("--setting", choices=SETTINGS, default="periodic")
    _common_test_flags(p)
    p.add_argument("--sigma", type=float, help="kernel bandwidth (default: median heuristic)")
    p.add_argument("--c", type=float, help="window width, aperiodic setting (default: heuristic)")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("pcg", help="phonocardiogram pipeline")
    psub = p.add_subparsers(dest="pcg_cmd", required=True)

    def pcg_flags(q, seeded=True):
        q.add_argument("--low", type=float, default=25.0, help="band-pass low edge, Hz")
        q.add_argument("--high", type=float, default=400.0, help="band-pass high edge, Hz")
        q.add_argument("--rms-window", type=float, default=0.05, help="seconds")
        q.add_argument("--min-bpm", type=float, default=40.0)
        q.add_argument("--max-bpm", type=float, default=180.0)
        q.add_argument("--source", choices=("envelope", "signal"), default="envelope")
        q.add_argument("--threads", **threads)
        if seeded:
            q.add_argument("--seed", type=int, default=0)

    q = psub.add_parser("synth", help="write a synthetic corpus of WAV files")
    q.add_argument("outdir")
    q.add_argument("--count", type=_positive_int, default=160)
    q.add_argument("--period", type=float, default=0.8)
    q.add_argument("--duration", type=float, default=5.0)
    q.add_argument("--seed", type=int, default=0)

    q = psub.add_parser("extract", help="extract one cycle per recording to a signal CSV")
    q.add_argument("directory")
    q.add_argument("-o", "--output", required=True)
    q.add_argument("--mode", choices=("s1", "random"), default="s1")
    pcg_flags(q)

    for name, helptext in (("misalign", "S1-aligned against random-start cycles"),
                           ("labels", "normal against abnormal recordings")):
        q = psub.add_parser(name, help=helptext)
        q.add_argument("directory")
        if name == "labels":
            q.add_argument("--labels", required=True, help="CSV of record_id,label")
        q.add_argument("--n", type=_positive_int, nargs="+", default=[10, 20, 30, 40, 50, 60, 70, 80])
        q.add_argument("--reps", type=_positive_int, default=300)
        q.add_argument("-o", "--output", help="CSV path (default stdout)")
        pcg_flags(q, seeded=False)
        _common_test_flags(q)
    p.set_defaults(func=cmd_pcg)

    p = sub.add_parser("plot", help="render a results CSV as an SVG line chart")
    p.add_argument("csv")
    p.add_argument("svg")
    p.add_argument("--xlabel")
    p.add_argument("--ylabel", default="rejection rate")
    p.add_argument("--title", default="")
    p.add_argument("--alpha", type=float, help="draw a reference line at this level")
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as e:
        print(f"invmmd: error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except BandInvalid as e:
        print(f"invmmd: error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except InvMMDError as e:
        print(f"invmmd: data error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as e:
        print(f"invmmd: error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
