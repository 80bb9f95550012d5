"""Plot-ready CSV extracts derived from sweep records, plus optional SVG rendering."""

from __future__ import annotations

import csv
import logging
from collections import defaultdict
from pathlib import Path

import numpy as np

from .sweep import SweepRecord, write_records

__all__ = ["SUMMARY_FILES", "emit_summaries", "write_spectra", "read_spectra", "render_svgs"]

logger = logging.getLogger(__name__)

SUMMARY_FILES = (
    "records.csv",
    "p50_vs_d.csv",
    "p95_vs_d.csv",
    "effrank_vs_d.csv",
    "testacc_vs_d.csv",
    "delta_testacc.csv",
    "mean_delta_per_dataset.csv",
    "tradeoff_scatter.csv",
    "bestC_vs_d.csv",
)


def _write(path: Path, header, rows) -> Path:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    return path


def _seed_mean(records, attr):
    """Mean of ``attr`` over seeds, keyed by (dataset, family, d), in first-seen order."""
    acc = defaultdict(list)
    for r in records:
        acc[(r.dataset, r.family, r.d)].append(float(getattr(r, attr)))
    return {k: float(np.mean(v)) for k, v in acc.items()}


def _sorted_keys(keys):
    return sorted(keys, key=lambda k: (k[0], k[1], k[2]))


def emit_summaries(records, out_dir, render: bool = False) -> list[Path]:
    """Write the long-form records CSV and every per-figure extract into ``out_dir``.

    Values are averaged over seeds where several are present, except
    ``bestC_vs_d`` which lists each seed's selected ``C``. With ``render`` and
    matplotlib installed, SVG line/scatter plots are drawn from the same tables.
    """
    records = list(records)
    if not records:
        raise ValueError("no records to summarize")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror}") from None

    written = [write_records(records, out / "records.csv")]
    for fname, attr in (
        ("p50_vs_d.csv", "p50"),
        ("p95_vs_d.csv", "p95"),
        ("effrank_vs_d.csv", "eff_rank"),
        ("testacc_vs_d.csv", "test_acc"),
    ):
        m = _seed_mean(records, attr)
        written.append(_write(out / fname, ["dataset", "family", "d", attr], [(*k, m[k]) for k in _sorted_keys(m)]))

    acc = _seed_mean(records, "test_acc")
    deltas = {}
    for (ds, fam, d), v in acc.items():
        base = acc.get((ds, "baseline", d))
        if fam != "baseline" and base is not None:
            deltas[(ds, fam, d)] = v - base
    written.append(
        _write(
            out / "delta_testacc.csv",
            ["dataset", "family", "d", "delta_test_acc"],
            [(*k, deltas[k]) for k in _sorted_keys(deltas)],
        )
    )
    per_ds = defaultdict(list)
    for (ds, fam, d), v in deltas.items():
        per_ds[(ds, fam)].append(v)
    written.append(
        _write(
            out / "mean_delta_per_dataset.csv",
            ["dataset", "family", "mean_delta_test_acc", "n_dims"],
            [(ds, fam, float(np.mean(v)), len(v)) for (ds, fam), v in sorted(per_ds.items())],
        )
    )

    p50 = _seed_mean(records, "p50")
    written.append(
        _write(
            out / "tradeoff_scatter.csv",
            ["dataset", "family", "d", "p50", "test_acc"],
            [(*k, p50[k], acc[k]) for k in _sorted_keys(acc)],
        )
    )
    written.append(
        _write(
            out / "bestC_vs_d.csv",
            ["dataset", "family", "d", "seed", "best_C"],
            sorted(((r.dataset, r.family, r.d, r.seed, float(r.best_C)) for r in records), key=lambda t: t[:4]),
        )
    )

    if all(r.spectrum is not None for r in records):
        written.extend(write_spectra(records, out))
    else:
        logger.info("records carry no spectra; spectra_d*.csv not written")

    if render:
        written.extend(render_svgs(out))
    return written


def write_spectra(records, out_dir) -> list[Path]:
    """``spectra_d{D}.csv``: one row per eigenvalue index, a ``mean`` column and one column per seed.

    Shorter spectra (smaller n in some run) are padded with zeros so every
    column still sums to 1.
    """
    out = Path(out_dir)
    by_d = defaultdict(lambda: defaultdict(dict))
    for r in records:
        by_d[r.d][(r.dataset, r.family)][r.seed] = np.asarray(r.spectrum, dtype=float)
    paths = []
    for d in sorted(by_d):
        seeds = sorted({s for runs in by_d[d].values() for s in runs})
        rows = []
        for (ds, fam), runs in sorted(by_d[d].items()):
            size = max(v.size for v in runs.values())
            padded = {s: np.pad(v, (0, size - v.size)) for s, v in runs.items()}
            mean = np.mean(np.stack(list(padded.values())), axis=0)
            for i in range(size):
                rows.append(
                    [ds, fam, i, float(mean[i])]
                    + [float(padded[s][i]) if s in padded else "" for s in seeds]
                )
        header = ["dataset", "family", "index", "mean"] + [f"seed_{s}" for s in seeds]
        paths.append(_write(out / f"spectra_d{d}.csv", header, rows))
    return paths


def read_spectra(out_dir, records) -> bool:
    """Attach spectra from ``spectra_d*.csv`` in ``out_dir`` to matching records.

    Returns True when every record received a spectrum.
    """
    out = Path(out_dir)
    found = {}
    for path in out.glob("spectra_d*.csv"):
        try:
            d = int(path.stem.removeprefix("spectra_d"))
        except ValueError:
            continue
        with path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            seed_cols = [c for c in reader.fieldnames or () if c.startswith("seed_")]
            for row in reader:
                for col in seed_cols:
                    if row[col] != "":
                        key = (row["dataset"], d, row["family"], int(col[5:]))
                        found.setdefault(key, []).append(float(row[col]))
    for r in records:
        if r.key in found:
            r.spectrum = np.asarray(found[r.key])
    return all(r.spectrum is not None for r in records)


def _read_table(path: Path):
    with path.open(newline="") as fh:
        return list(csv.DictReader(fh))


def render_svgs(out_dir) -> list[Path]:
    """Line plots of each ``*_vs_d`` table and the tradeoff scatter. Needs matplotlib."""
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        logger.warning("matplotlib is not installed; skipping SVG rendering")
        return []
    out = Path(out_dir)
    paths = []
    for stem, col in (
        ("p50_vs_d", "p50"),
        ("p95_vs_d", "p95"),
        ("effrank_vs_d", "eff_rank"),
        ("testacc_vs_d", "test_acc"),
        ("delta_testacc", "delta_test_acc"),
    ):
        rows = _read_table(out / f"{stem}.csv")
        fig, ax = plt.subplots(figsize=(5, 3.5))
        series = defaultdict(list)
        for row in rows:
            series[(row["dataset"], row["family"])].append((int(row["d"]), float(row[col])))
        for (ds, fam), pts in sorted(series.items()):
            pts.sort()
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=f"{ds}/{fam}")
        ax.set_xlabel("d (qubits)")
        ax.set_ylabel(col)
        if series:
            ax.legend(fontsize=7)
        fig.tight_layout()
        path = out / f"{stem}.svg"
        fig.savefig(path)
        plt.close(fig)
        paths.append(path)

    rows = _read_table(out / "tradeoff_scatter.csv")
    fig, ax = plt.subplots(figsize=(5, 3.5))
    fams = defaultdict(list)
    for row in rows:
        fams[row["family"]].append((float(row["p50"]), float(row["test_acc"])))
    for fam, pts in sorted(fams.items()):
        ax.scatter([p[0] for p in pts], [p[1] for p in pts], label=fam, s=14)
    ax.set_xlabel("p50")
    ax.set_ylabel("test accuracy")
    if fams:
        ax.legend(fontsize=7)
    fig.tight_layout()
    path = out / "tradeoff_scatter.svg"
    fig.savefig(path)
    plt.close(fig)
    paths.append(path)
    return paths
