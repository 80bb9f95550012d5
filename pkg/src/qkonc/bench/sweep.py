"""Matched sweep: datasets x dims x kernel families on shared preprocessing and splits."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from ..data import Dataset, load_csv, make_splits, make_synthetic, preprocess, subsample_indices
from ..diagnostics import diagnose
from ..kernels import compute_kernel, save_gram
from ..learn import select_and_evaluate
from .config import DatasetSource, SweepConfig

__all__ = ["SweepRecord", "run_sweep", "load_dataset", "thread_count", "write_records", "read_records"]

logger = logging.getLogger(__name__)


@dataclass
class SweepRecord:
    dataset: str
    d: int
    family: str
    p50: float
    p95: float
    eff_rank: float
    alignment: float
    best_C: float
    val_acc: float
    test_acc: float
    wall_time_seconds: float
    seed: int = 0
    # not part of the CSV; carried to the spectra extracts
    spectrum: np.ndarray | None = field(default=None, repr=False, compare=False)

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls) if f.name != "spectrum"]

    def as_row(self) -> dict:
        row = asdict(self)
        row.pop("spectrum")
        return row

    @property
    def key(self) -> tuple:
        return (self.dataset, self.d, self.family, self.seed)


def thread_count() -> int:
    raw = os.environ.get("QKONC_THREADS")
    if raw is None or raw.strip() == "":
        return max(1, min(4, os.cpu_count() or 1))
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"QKONC_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"QKONC_THREADS must be a positive integer, got {raw!r}")
    return n


def load_dataset(src: DatasetSource) -> Dataset:
    o = src.opts
    if src.kind == "synthetic":
        return make_synthetic(
            src.target,
            n=int(o.get("n", 120)),
            noise=float(o.get("noise", 0.1)),
            seed=int(o.get("seed", 0)),
            n_features=int(o.get("features", 8)),
        )
    return load_csv(src.target, o["label"], positive_label=o.get("positive"), name=src.name)


def _sha256(arr: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(arr, dtype="<f8").tobytes()).hexdigest()


def _run_cell(config: SweepConfig, name: str, ds: Dataset, seed: int, d: int) -> list[SweepRecord]:
    n_orig = ds.n
    keep = subsample_indices(n_orig, config.n_max, seed)
    sub = ds.subset(keep)
    X = preprocess(sub.features, d)
    y = sub.labels
    splits = make_splits(sub.n, seed, config.ratios)
    cell_dir = Path(config.out_dir) / "kernels" / name / f"d{d}" / f"seed{seed}"
    split_path = splits.save(cell_dir / "splits.json")
    features_hash = _sha256(X)
    splits_hash = hashlib.sha256(split_path.read_bytes()).hexdigest()

    records = []
    for family in config.families:
        t0 = time.perf_counter()
        K = compute_kernel(X, config.kernel_config(family))
        report = diagnose(K.entries, y)
        sel = select_and_evaluate(K.entries, y, splits, config.c_grid)
        elapsed = time.perf_counter() - t0
        if config.save_kernels:
            save_gram(
                K,
                cell_dir / family,
                extra={
                    "dataset": name,
                    "d": d,
                    "seed": seed,
                    "sweep_family": family,
                    "n_original": n_orig,
                    "n_max": config.n_max,
                    "subsample_indices": [int(i) for i in keep],
                    "labels": [int(v) for v in y],
                    "features_sha256": features_hash,
                    "splits_file": split_path.name,
                    "splits_sha256": splits_hash,
                },
            )
        records.append(
            SweepRecord(
                dataset=name,
                d=d,
                family=family,
                p50=report.p50,
                p95=report.p95,
                eff_rank=report.effective_rank,
                alignment=report.alignment,
                best_C=sel.best_C,
                val_acc=sel.val_accuracy,
                test_acc=sel.test_accuracy,
                wall_time_seconds=elapsed,
                seed=seed,
                spectrum=report.spectrum,
            )
        )
        logger.info("%s d=%d seed=%d %s: p50=%.4f test_acc=%.3f", name, d, seed, family, report.p50, sel.test_accuracy)
    return records


def run_sweep(config: SweepConfig, failures: list | None = None) -> list[SweepRecord]:
    """Run every (dataset, seed, d) cell and return records sorted by (dataset, d, family, seed).

    A dataset that fails to load or to run is logged, appended to ``failures``
    as ``(name, message)`` and skipped. Failures are also written to
    ``<out>/failures.json`` when any occur.
    """
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    failed: list = [] if failures is None else failures
    loaded = []
    for src in config.datasets:
        try:
            loaded.append((src.name, load_dataset(src)))
        except (OSError, ValueError, KeyError) as exc:
            logger.error("dataset %s skipped: %s", src.name, exc)
            failed.append((src.name, str(exc)))

    cells = [(name, ds, seed, d) for name, ds in loaded for seed in config.seeds for d in config.dims]
    records: list[SweepRecord] = []
    bad: set[str] = set()
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        futures = [(c[0], pool.submit(_run_cell, config, *c)) for c in cells]
        for name, fut in futures:
            try:
                records.extend(fut.result())
            except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
                logger.error("dataset %s failed: %s", name, exc)
                if name not in bad:
                    failed.append((name, str(exc)))
                bad.add(name)
    # a dataset that failed anywhere is dropped entirely
    records = [r for r in records if r.dataset not in bad]
    if failed:
        (out / "failures.json").write_text(json.dumps([{"dataset": n, "error": m} for n, m in failed], indent=2))
    order = {f: i for i, f in enumerate(("baseline", "local", "multiscale"))}
    records.sort(key=lambda r: (r.dataset, r.d, order.get(r.family, 99), r.seed))
    return records


def write_records(records, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SweepRecord.columns())
        w.writeheader()
        for r in records:
            w.writerow({k: repr(float(v)) if isinstance(v, float) else v for k, v in r.as_row().items()})
    return path


_INT_COLS = {"d", "seed"}
_STR_COLS = {"dataset", "family"}


def read_records(path) -> list[SweepRecord]:
    path = Path(path)
    out = []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        required = set(SweepRecord.columns()) - {"seed"}
        missing = required - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: records CSV lacks columns {sorted(missing)}")
        for line, row in enumerate(reader, 2):
            try:
                kw = {}
                for col in SweepRecord.columns():
                    raw = row.get(col)
                    if col == "seed" and not raw:
                        raw = "0"
                    if col in _STR_COLS:
                        kw[col] = raw
                    elif col in _INT_COLS:
                        kw[col] = int(raw)
                    else:
                        kw[col] = float(raw) if raw not in ("", "None") else float("nan")
                out.append(SweepRecord(**kw))
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{line}: {exc}") from None
    return out
