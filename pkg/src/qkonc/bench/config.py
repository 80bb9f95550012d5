"""Flat ``key = value`` sweep configuration files.

One setting per line, ``#`` starts a comment. ``dataset`` may be repeated;
every other key appears at most once. Recognised keys and their types::

    dataset       = synthetic:<kind> [n=120] [noise=0.1] [seed=0] [features=8]
                  | csv:<path> label=<column> [positive=<value>] [name=<name>]
    dims          = int list            (default 4, 6, ..., 20)
    families      = str list            subset of baseline, local, multiscale
    feature_map   = zz_manual | zz_manual_canonical | zz_qiskit
    depth         = int                 (default 1)
    entanglement  = linear | ring
    local_method  = rdm | subcircuit    (default rdm)
    rdm_metric    = hs | fidelity       (default hs)
    seeds         = int list            (default 0)
    n_max         = int                 (default 200)
    ratios        = float list          (default 0.6, 0.2, 0.2)
    c_grid        = float list          (default 0.1, 1, 10)
    block_size    = int                 (default 64)
    save_kernels  = bool                (default true)
    out           = path                (default results)

Relative CSV and output paths are resolved against the config file's directory.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..featuremaps import FeatureMapSpec
from ..kernels import KernelConfig, KernelFamily, RdmMetric

__all__ = ["ConfigError", "DatasetSource", "SweepConfig", "parse_config", "load_config", "parse_dataset"]

FAMILIES = ("baseline", "local", "multiscale")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DatasetSource:
    kind: str  # "synthetic" or "csv"
    target: str  # synthetic kind or csv path
    options: tuple[tuple[str, str], ...] = ()

    @property
    def opts(self) -> dict:
        return dict(self.options)

    @property
    def name(self) -> str:
        o = self.opts
        if "name" in o:
            return o["name"]
        return self.target if self.kind == "synthetic" else Path(self.target).stem


@dataclass(frozen=True)
class SweepConfig:
    datasets: tuple[DatasetSource, ...]
    dims: tuple[int, ...] = tuple(range(4, 21, 2))
    families: tuple[str, ...] = FAMILIES
    feature_map: FeatureMapSpec = field(default_factory=FeatureMapSpec)
    local_method: str = "rdm"
    rdm_metric: str = "hs"
    seeds: tuple[int, ...] = (0,)
    n_max: int = 200
    ratios: tuple[float, float, float] = (0.6, 0.2, 0.2)
    c_grid: tuple[float, ...] = (0.1, 1.0, 10.0)
    block_size: int = 64
    save_kernels: bool = True
    out_dir: Path = Path("results")

    def __post_init__(self):
        if not self.datasets:
            raise ConfigError("config lists no datasets")
        if not self.dims or any(d < 2 for d in self.dims):
            raise ConfigError(f"dims must be nonempty and each >= 2, got {self.dims}")
        if self.n_max < 10:
            raise ConfigError(f"n_max must be >= 10, got {self.n_max}")
        bad = [f for f in self.families if f not in FAMILIES]
        if bad or not self.families:
            raise ConfigError(f"families must be a nonempty subset of {FAMILIES}, got {self.families}")
        if self.local_method not in ("rdm", "subcircuit"):
            raise ConfigError(f"local_method must be rdm or subcircuit, got {self.local_method!r}")
        if self.rdm_metric not in ("hs", "fidelity"):
            raise ConfigError(f"rdm_metric must be hs or fidelity, got {self.rdm_metric!r}")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if not self.c_grid:
            raise ConfigError("c_grid must be nonempty")

    def kernel_config(self, family: str) -> KernelConfig:
        if family == "baseline":
            return KernelConfig(KernelFamily.BASELINE, self.feature_map, block_size=self.block_size)
        if family == "multiscale":
            return KernelConfig(KernelFamily.MULTISCALE, self.feature_map, block_size=self.block_size)
        if self.local_method == "subcircuit":
            return KernelConfig(KernelFamily.LOCAL_SUBCIRCUIT, self.feature_map, block_size=self.block_size)
        return KernelConfig(
            KernelFamily.LOCAL_RDM, self.feature_map, RdmMetric(self.rdm_metric), block_size=self.block_size
        )

    def with_overrides(self, **changes) -> "SweepConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **changes)


def parse_dataset(text: str, base: Path | None = None) -> DatasetSource:
    parts = text.split()
    if not parts or ":" not in parts[0]:
        raise ConfigError(f"dataset must look like 'synthetic:<kind> ...' or 'csv:<path> ...', got {text!r}")
    kind, target = parts[0].split(":", 1)
    opts = []
    for p in parts[1:]:
        if "=" not in p:
            raise ConfigError(f"dataset option {p!r} is not key=value")
        k, v = p.split("=", 1)
        opts.append((k, v))
    if kind == "csv":
        if base is not None and not Path(target).is_absolute():
            target = os.path.normpath(base / target)
        if "label" not in dict(opts):
            raise ConfigError(f"csv dataset {target!r} needs label=<column>")
    elif kind == "synthetic":
        if target not in ("two_moons_like", "gaussian_blobs"):
            raise ConfigError(f"unknown synthetic dataset {target!r}")
    else:
        raise ConfigError(f"unknown dataset kind {kind!r}")
    return DatasetSource(kind, target, tuple(opts))


def _ints(v: str) -> tuple[int, ...]:
    return tuple(int(x) for x in v.replace(",", " ").split())


def _floats(v: str) -> tuple[float, ...]:
    return tuple(float(x) for x in v.replace(",", " ").split())


def _strs(v: str) -> tuple[str, ...]:
    return tuple(x for x in v.replace(",", " ").split())


def _bool(v: str) -> bool:
    low = v.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


_SCALARS = {
    "dims": ("dims", _ints),
    "families": ("families", _strs),
    "seeds": ("seeds", _ints),
    "n_max": ("n_max", int),
    "ratios": ("ratios", _floats),
    "c_grid": ("c_grid", _floats),
    "block_size": ("block_size", int),
    "save_kernels": ("save_kernels", _bool),
    "local_method": ("local_method", str),
    "rdm_metric": ("rdm_metric", str),
}
_FEATURE_MAP_KEYS = ("feature_map", "depth", "entanglement")


def parse_config(text: str, base: Path | None = None) -> SweepConfig:
    base = Path(base) if base is not None else Path.cwd()
    datasets = []
    values: dict = {}
    fmap: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        try:
            if key == "dataset":
                datasets.append(parse_dataset(val, base))
            elif key in _SCALARS:
                name, conv = _SCALARS[key]
                if name in values:
                    raise ConfigError(f"duplicate key {key!r}")
                values[name] = conv(val)
            elif key in _FEATURE_MAP_KEYS:
                fmap[key] = val
            elif key == "out":
                out = Path(val)
                values["out_dir"] = out if out.is_absolute() else Path(os.path.normpath(base / out))
            else:
                raise ConfigError(f"unknown key {key!r}")
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    try:
        values["feature_map"] = FeatureMapSpec(
            fmap.get("feature_map", "zz_manual"),
            int(fmap.get("depth", 1)),
            fmap.get("entanglement", "linear"),
        )
    except ValueError as exc:
        raise ConfigError(f"bad feature map: {exc}") from None
    if "ratios" in values and len(values["ratios"]) != 3:
        raise ConfigError("ratios needs exactly three values")
    return SweepConfig(datasets=tuple(datasets), **values)


def load_config(path) -> SweepConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, base=path.parent)
