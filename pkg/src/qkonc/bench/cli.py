"""Command-line entry point: ``qkonc {sweep,kernel,diagnose,plot}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from ..data import make_splits, preprocess, subsample_indices
from ..diagnostics import diagnose
from ..kernels import compute_kernel, load_gram, save_gram
from .config import FAMILIES, ConfigError, SweepConfig, load_config, parse_dataset
from .summaries import emit_summaries, read_spectra
from .sweep import load_dataset, read_records, run_sweep

__all__ = ["build_parser", "cli_main", "main"]

logger = logging.getLogger("qkonc")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _families(text: str) -> tuple[str, ...]:
    fams = tuple(v for v in text.replace(",", " ").split())
    bad = [f for f in fams if f not in FAMILIES]
    if bad or not fams:
        raise argparse.ArgumentTypeError(f"families must be drawn from {', '.join(FAMILIES)}")
    return fams


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qkonc", description="Local and multi-scale quantum kernel benchmarks.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sweep", help="run a configured sweep and write summaries")
    s.add_argument("--config", required=True, type=Path)
    s.add_argument("--out", type=Path, help="override the output directory")
    s.add_argument("--seed", type=_int_list, help="override the seed list")
    s.add_argument("--dims", type=_int_list, help="override the qubit counts")
    s.add_argument("--families", type=_families, help="override the kernel families")
    s.add_argument("--nmax", type=int, help="override the subsample cap")
    s.add_argument("--svg", action="store_true", help="also render SVG plots (needs matplotlib)")

    k = sub.add_parser("kernel", help="compute and save one Gram matrix")
    k.add_argument("--dataset", required=True, help="e.g. 'synthetic:two_moons_like n=60' or 'csv:data.csv label=y'")
    k.add_argument("--d", type=int, required=True, help="number of qubits / reduced features")
    k.add_argument("--family", choices=FAMILIES, required=True)
    k.add_argument("--out", type=Path, required=True, help="output stem; writes <stem>.json and <stem>.bin")
    k.add_argument("--config", type=Path, help="take feature map and local-kernel settings from this config")
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--nmax", type=int, default=200)

    g = sub.add_parser("diagnose", help="print diagnostics of a saved Gram matrix")
    g.add_argument("path", type=Path, help="header (.json), binary (.bin) or their common stem")
    g.add_argument("--json", action="store_true", help="print the full report as JSON")

    pl = sub.add_parser("plot", help="regenerate summary CSVs (and optionally SVGs) from a records CSV")
    pl.add_argument("--records", required=True, type=Path)
    pl.add_argument("--out", type=Path, help="output directory (default: next to the records file)")
    pl.add_argument("--svg", action="store_true")
    return p


def _cmd_sweep(args) -> int:
    config = load_config(args.config)
    config = config.with_overrides(
        out_dir=args.out, seeds=args.seed, dims=args.dims, families=args.families, n_max=args.nmax
    )
    t0 = time.perf_counter()
    failures: list = []
    records = run_sweep(config, failures)
    if not records:
        reason = "; ".join(f"{n}: {m}" for n, m in failures) or "no records"
        print(f"error: sweep produced no records ({reason})", file=sys.stderr)
        return 1
    emit_summaries(records, config.out_dir, render=args.svg)
    print(
        f"{len(records)} records written to {config.out_dir} in {time.perf_counter() - t0:.1f}s"
        + (f"; {len(failures)} dataset(s) skipped" if failures else "")
    )
    return 0


def _cmd_kernel(args) -> int:
    src = parse_dataset(args.dataset, Path.cwd())
    base = load_config(args.config) if args.config else SweepConfig(datasets=(src,))
    ds = load_dataset(src)
    keep = subsample_indices(ds.n, args.nmax, args.seed)
    sub = ds.subset(keep)
    X = preprocess(sub.features, args.d)
    K = compute_kernel(X, base.kernel_config(args.family))
    splits = make_splits(sub.n, args.seed, base.ratios)
    stem = args.out
    split_path = splits.save(stem.with_name(stem.name + ".splits.json"))
    header, _ = save_gram(
        K,
        stem,
        extra={
            "dataset": src.name,
            "d": args.d,
            "seed": args.seed,
            "sweep_family": args.family,
            "n_original": ds.n,
            "n_max": args.nmax,
            "subsample_indices": [int(i) for i in keep],
            "labels": [int(v) for v in sub.labels],
            "splits_file": split_path.name,
        },
    )
    print(f"wrote {header} ({K.n}x{K.n})")
    return 0


def _cmd_diagnose(args) -> int:
    gram = load_gram(args.path)
    labels = gram.meta.get("labels")
    y = np.asarray(labels) if labels is not None and len(np.unique(labels)) > 1 else None
    report = diagnose(gram.entries, y)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        for key, val in report.row().items():
            print(f"{key} = {'n/a' if val is None else f'{val:.10g}'}")
        print(f"n = {gram.n}")
    return 0


def _cmd_plot(args) -> int:
    records = read_records(args.records)
    out = args.out or args.records.parent
    read_spectra(args.records.parent, records)
    files = emit_summaries(records, out, render=args.svg)
    print(f"{len(files)} files written to {out}")
    return 0


_COMMANDS = {"sweep": _cmd_sweep, "kernel": _cmd_kernel, "diagnose": _cmd_diagnose, "plot": _cmd_plot}


def cli_main(argv=None) -> int:
    """Parse ``argv`` and run a subcommand. Returns the process exit code.

    Argument errors exit with 2 (argparse). Invalid configs and runtime
    failures print a one-line reason to stderr and return 1.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"error: {msg}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())
