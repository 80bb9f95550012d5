"""Baseline, local (patch-wise) and multi-scale fidelity kernels.

All constructions take a feature matrix ``X`` of shape ``(n, d)`` and a
:class:`KernelConfig`. Statevectors are prepared in row blocks so that at
``d >= 16`` no more than ``2 * block_size`` of them are alive at once.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .featuremaps import FeatureMapSpec, encode_batch, encode_patch_batch
from .simcore import fidelity_batch, hermitian_eig, psd_sqrt, reduced_density_batch

__all__ = [
    "KernelFamily",
    "RdmMetric",
    "PatchSet",
    "ScaleSpec",
    "KernelConfig",
    "GramMatrix",
    "default_patches",
    "default_scales",
    "baseline_kernel",
    "baseline_kernel_from_features",
    "local_patch_grams",
    "local_kernel",
    "multiscale_kernel",
    "compute_kernel",
    "symmetrize",
    "unit_diag_normalize",
    "psd_clip",
    "center",
    "cross_kernel",
    "nystrom_features",
    "save_gram",
    "load_gram",
]

# statevectors of at least this many qubits are never all resident at once
STREAMING_QUBITS = 16
# above this patch size a full-system density matrix (4**k entries) is not formed
MAX_DENSE_RDM_QUBITS = 7
PAIR_CHUNK = 4096


class KernelFamily(str, Enum):
    BASELINE = "baseline"
    LOCAL_SUBCIRCUIT = "local_subcircuit"
    LOCAL_RDM = "local_rdm"
    MULTISCALE = "multiscale"


class RdmMetric(str, Enum):
    FIDELITY = "fidelity"
    HS = "hs"


def _normalize_weights(w: Sequence[float], what: str) -> tuple[float, ...]:
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError(f"{what} must be a nonempty 1-D sequence")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError(f"{what} must be finite and nonnegative")
    total = w.sum()
    if total <= 0:
        raise ValueError(f"{what} must not all be zero")
    return tuple(float(v) for v in w / total)


def _as_patch(p: Iterable[int]) -> tuple[int, ...]:
    p = tuple(int(q) for q in p)
    if not p:
        raise ValueError("patches must be nonempty")
    if len(set(p)) != len(p):
        raise ValueError(f"duplicate indices in patch {p}")
    return p


@dataclass(frozen=True)
class PatchSet:
    """Qubit patches and their convex weights (renormalized on construction)."""

    patches: tuple[tuple[int, ...], ...]
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        patches = tuple(_as_patch(p) for p in self.patches)
        if not patches:
            raise ValueError("a patch set needs at least one patch")
        w = self.weights if self.weights is not None else [1.0] * len(patches)
        if len(w) != len(patches):
            raise ValueError(f"{len(w)} weights for {len(patches)} patches")
        object.__setattr__(self, "patches", patches)
        object.__setattr__(self, "weights", _normalize_weights(w, "patch weights"))

    def validate(self, d: int) -> None:
        for p in self.patches:
            bad = [q for q in p if not 0 <= q < d]
            if bad:
                raise ValueError(f"patch {p} has indices {bad} outside 0..{d - 1}")

    def to_dict(self) -> dict:
        return {"patches": [list(p) for p in self.patches], "weights": list(self.weights)}


@dataclass(frozen=True)
class ScaleSpec:
    """Patch collections at several granularities and their mixing weights."""

    scales: tuple[tuple[tuple[int, ...], ...], ...]
    alphas: tuple[float, ...] | None = None

    def __post_init__(self):
        scales = tuple(tuple(_as_patch(p) for p in s) for s in self.scales)
        if not scales or any(len(s) == 0 for s in scales):
            raise ValueError("every scale needs at least one patch")
        a = self.alphas if self.alphas is not None else [1.0] * len(scales)
        if len(a) != len(scales):
            raise ValueError(f"{len(a)} alphas for {len(scales)} scales")
        object.__setattr__(self, "scales", scales)
        object.__setattr__(self, "alphas", _normalize_weights(a, "scale weights"))

    def validate(self, d: int) -> None:
        for s in self.scales:
            PatchSet(s).validate(d)

    def to_dict(self) -> dict:
        return {
            "scales": [[list(p) for p in s] for s in self.scales],
            "alphas": list(self.alphas),
        }


def default_patches(d: int) -> PatchSet:
    """Disjoint adjacent pairs ``(0,1), (2,3), ...``; odd ``d`` adds the singleton ``(d-1,)``."""
    if d < 2:
        raise ValueError(f"default patches need d >= 2, got {d}")
    patches = [(2 * m, 2 * m + 1) for m in range(d // 2)]
    if d % 2:
        patches.append((d - 1,))
    return PatchSet(tuple(patches))


def default_scales(d: int, alphas: Sequence[float] = (0.5, 0.5)) -> ScaleSpec:
    """Two scales: the default pairs and the full system."""
    pairs = default_patches(d).patches
    return ScaleSpec((pairs, (tuple(range(d)),)), tuple(alphas))


@dataclass(frozen=True)
class KernelConfig:
    family: KernelFamily = KernelFamily.BASELINE
    feature_map: FeatureMapSpec = field(default_factory=FeatureMapSpec)
    rdm_metric: RdmMetric | None = None
    patch_set: PatchSet | None = None
    scale_spec: ScaleSpec | None = None
    block_size: int = 64

    def __post_init__(self):
        family = KernelFamily(self.family)
        object.__setattr__(self, "family", family)
        if self.rdm_metric is not None:
            object.__setattr__(self, "rdm_metric", RdmMetric(self.rdm_metric))
        if (self.rdm_metric is not None) != (family is KernelFamily.LOCAL_RDM):
            raise ValueError("rdm_metric must be given exactly when family is local_rdm")
        if self.block_size < 1:
            raise ValueError("block_size must be positive")

    def patches_for(self, d: int) -> PatchSet:
        ps = self.patch_set if self.patch_set is not None else default_patches(d)
        ps.validate(d)
        return ps

    def scales_for(self, d: int) -> ScaleSpec:
        ss = self.scale_spec if self.scale_spec is not None else default_scales(d)
        ss.validate(d)
        return ss

    def describe(self, d: int | None = None) -> dict:
        out = {"family": self.family.value, "feature_map": self.feature_map.to_dict()}
        if self.rdm_metric is not None:
            out["rdm_metric"] = self.rdm_metric.value
        if d is not None and self.family in (KernelFamily.LOCAL_RDM, KernelFamily.LOCAL_SUBCIRCUIT):
            out["patch_set"] = self.patches_for(d).to_dict()
        if d is not None and self.family is KernelFamily.MULTISCALE:
            out["scale_spec"] = self.scales_for(d).to_dict()
        return out


@dataclass
class GramMatrix:
    """A real kernel matrix plus provenance (``family``, ``feature_map``, ``postprocessing``)."""

    entries: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=float)
        if self.entries.ndim != 2:
            raise ValueError(f"Gram matrix must be 2-D, got shape {self.entries.shape}")

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def _with(self, entries: np.ndarray, step: str) -> "GramMatrix":
        meta = dict(self.meta)
        meta["postprocessing"] = list(meta.get("postprocessing", [])) + [step]
        return GramMatrix(entries, meta)


def _unwrap(K) -> tuple[np.ndarray, GramMatrix]:
    if isinstance(K, GramMatrix):
        return K.entries, K
    arr = np.asarray(K, dtype=float)
    return arr, GramMatrix(arr)


def _square(K: np.ndarray) -> None:
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {K.shape}")


# ---------------------------------------------------------------------------
# post-processing


def symmetrize(K) -> GramMatrix:
    arr, g = _unwrap(K)
    _square(arr)
    return g._with(0.5 * (arr + arr.T), "symmetrize")


def unit_diag_normalize(K) -> GramMatrix:
    """``K_ij / sqrt(K_ii K_jj)``; the diagonal is then exactly 1."""
    arr, g = _unwrap(K)
    _square(arr)
    diag = np.diag(arr).copy()
    bad = np.flatnonzero(~(diag > 0))
    if bad.size:
        i = int(bad[0])
        raise ValueError(f"cannot normalize: diagonal entry {i} is {diag[i]!r} (must be > 0)")
    s = np.sqrt(diag)
    out = arr / s[:, None] / s[None, :]
    np.fill_diagonal(out, 1.0)
    return g._with(out, "unit_diag")


def psd_clip(K) -> GramMatrix:
    """Project a symmetric matrix onto the PSD cone by zeroing negative eigenvalues."""
    arr, g = _unwrap(K)
    _square(arr)
    if np.max(np.abs(arr - arr.T), initial=0.0) > 1e-8 * max(1.0, np.max(np.abs(arr), initial=0.0)):
        raise ValueError("psd_clip requires a symmetric matrix")
    es = hermitian_eig(arr)
    lam = np.where(es.eigenvalues < 0.0, 0.0, es.eigenvalues)
    v = es.eigenvectors
    out = (v * lam) @ v.T
    return g._with(0.5 * (out + out.T), "psd_clip")


def center(K) -> GramMatrix:
    """``H K H`` with ``H = I - 11^T / n``."""
    arr, g = _unwrap(K)
    _square(arr)
    out = arr - arr.mean(axis=0, keepdims=True) - arr.mean(axis=1, keepdims=True) + arr.mean()
    return g._with(out, "center")


# ---------------------------------------------------------------------------
# state preparation in blocks


def _blocks(n: int, size: int) -> list[slice]:
    return [slice(i, min(i + size, n)) for i in range(0, n, size)]


def _encoder(spec: FeatureMapSpec, patch: Sequence[int] | None):
    if patch is None:
        return lambda X: encode_batch(spec, X)
    return lambda X: encode_patch_batch(spec, X, patch)


def _overlap_gram(
    spec: FeatureMapSpec, X: np.ndarray, block_size: int, patch: Sequence[int] | None = None
) -> np.ndarray:
    """Raw ``|<psi_i|psi_j>|**2`` for all pairs, diagonal included."""
    n, d = X.shape
    k = d if patch is None else len(patch)
    enc = _encoder(spec, patch)
    if k < STREAMING_QUBITS:
        S = enc(X)
        return np.abs(S.conj() @ S.T) ** 2
    K = np.empty((n, n))
    blocks = _blocks(n, block_size)
    for a, ba in enumerate(blocks):
        Sa = enc(X[ba])
        for bb in blocks[a:]:
            Sb = Sa if bb == ba else enc(X[bb])
            blk = np.abs(Sa.conj() @ Sb.T) ** 2
            K[ba, bb] = blk
            K[bb, ba] = blk.T
    return K


def _patch_rdms(
    spec: FeatureMapSpec, X: np.ndarray, patches: Sequence[tuple[int, ...]], block_size: int
) -> list[np.ndarray]:
    """Reduced density matrices of every sample for every patch, statevectors prepared once."""
    n, d = X.shape
    size = n if d < STREAMING_QUBITS else block_size
    out = [np.empty((n, 2 ** len(p), 2 ** len(p)), dtype=complex) for p in patches]
    for blk in _blocks(n, size):
        S = encode_batch(spec, X[blk])
        for m, p in enumerate(patches):
            out[m][blk] = reduced_density_batch(S, p)
    return out


def _hs_gram(rho_a: np.ndarray, rho_b: np.ndarray, rowwise: bool = False) -> np.ndarray:
    """``Tr(rho_a[i] rho_b[j])`` via a real matrix product."""
    fa = rho_a.reshape(rho_a.shape[0], -1)
    fb = rho_b.reshape(rho_b.shape[0], -1)
    ra = np.concatenate([fa.real, fa.imag], axis=1)
    rb = np.concatenate([fb.real, fb.imag], axis=1)
    if rowwise:
        return _rowwise(ra, rb)
    return ra @ rb.T


def _fidelity_gram(rhos: np.ndarray) -> np.ndarray:
    """Squared Uhlmann fidelity for all pairs ``i < j``; diagonal set to 1."""
    n = rhos.shape[0]
    sq = psd_sqrt(rhos)
    G = np.eye(n)
    iu, ju = np.triu_indices(n, k=1)
    for start in range(0, iu.size, PAIR_CHUNK):
        i = iu[start : start + PAIR_CHUNK]
        j = ju[start : start + PAIR_CHUNK]
        f = fidelity_batch(sq[i], rhos[j])
        G[i, j] = f
        G[j, i] = f
    return G


def _check_X(X, d: int | None = None) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError(f"expected a nonempty (n, d) feature matrix, got shape {X.shape}")
    if d is not None and X.shape[1] != d:
        raise ValueError(f"expected {d} features, got {X.shape[1]}")
    return X


# ---------------------------------------------------------------------------
# kernel families


def _finish_baseline(K: np.ndarray, meta: dict) -> GramMatrix:
    K = 0.5 * (K + K.T)
    np.fill_diagonal(K, 1.0)
    return GramMatrix(K, dict(meta, postprocessing=["symmetrize", "unit_diag"]))


def baseline_kernel(states) -> GramMatrix:
    """Global fidelity Gram matrix from prepared statevectors.

    ``states`` is a list of :class:`~qkonc.simcore.Statevector` or an
    ``(n, 2**d)`` array. The result is symmetrized and its diagonal set to 1.
    """
    if isinstance(states, np.ndarray):
        S = states
    else:
        states = list(states)
        if not states:
            raise ValueError("need at least one state")
        dims = {s.num_qubits for s in states}
        if len(dims) > 1:
            raise ValueError(f"states have mixed qubit counts {sorted(dims)}")
        S = np.stack([s.amplitudes for s in states])
    if S.ndim != 2 or S.shape[0] == 0:
        raise ValueError("need at least one state")
    K = np.abs(S.conj() @ S.T) ** 2
    return _finish_baseline(K, {"family": KernelFamily.BASELINE.value})


def baseline_kernel_from_features(X, feature_map: FeatureMapSpec, block_size: int = 64) -> GramMatrix:
    """Baseline Gram matrix computed straight from features, streaming statevectors at large d."""
    X = _check_X(X)
    K = _overlap_gram(feature_map, X, block_size)
    return _finish_baseline(
        K, {"family": KernelFamily.BASELINE.value, "feature_map": feature_map.to_dict()}
    )


def local_patch_grams(X, config: KernelConfig) -> list[np.ndarray]:
    """One Gram matrix per patch, before aggregation.

    Subcircuit patches use the baseline construction on the restricted circuit.
    RDM patches carry a unit diagonal and the chosen metric off the diagonal.
    """
    X = _check_X(X)
    n, d = X.shape
    spec = config.feature_map
    patches = config.patches_for(d).patches

    if config.family is KernelFamily.LOCAL_SUBCIRCUIT:
        grams = []
        for p in patches:
            G = _overlap_gram(spec, X, config.block_size, patch=p)
            grams.append(_finish_baseline(G, {}).entries)
        return grams

    if config.family is not KernelFamily.LOCAL_RDM:
        raise ValueError(f"local_kernel does not handle family {config.family.value}")

    dense = [p for p in patches if not (len(p) == d and d > MAX_DENSE_RDM_QUBITS)]
    rdms = dict(zip(dense, _patch_rdms(spec, X, dense, config.block_size)))
    grams = []
    for p in patches:
        if p in rdms:
            rho = rdms[p]
            if config.rdm_metric is RdmMetric.HS:
                G = _hs_gram(rho, rho)
            else:
                G = _fidelity_gram(rho)
        else:
            # pure full-system states: both metrics reduce to the squared overlap
            G = _overlap_gram(spec, X, config.block_size)
        G = G.copy()
        np.fill_diagonal(G, 1.0)
        grams.append(G)
    return grams


def local_kernel(X, config: KernelConfig, project_psd: bool = True) -> GramMatrix:
    """Patch-wise kernel: aggregate, symmetrize, normalize, PSD-clip, renormalize.

    With ``project_psd=False`` the last two steps are skipped, which exposes the
    aggregated kernel for equivalence checks.
    """
    X = _check_X(X)
    d = X.shape[1]
    weights = config.patches_for(d).weights
    grams = local_patch_grams(X, config)
    K = np.zeros_like(grams[0])
    for w, G in zip(weights, grams):
        K = K + w * G
    g = GramMatrix(K, config.describe(d))
    g = unit_diag_normalize(symmetrize(g))
    if project_psd:
        g = unit_diag_normalize(psd_clip(g))
    return g


def _multiscale_raw(X: np.ndarray, config: KernelConfig, Z: np.ndarray | None = None) -> np.ndarray:
    """Unnormalized ``sum_s alpha_s mean_P k_P``; ``k_P`` is fidelity for full patches, HS otherwise."""
    d = X.shape[1]
    spec = config.feature_map
    ss = config.scales_for(d)
    partial = sorted({p for s in ss.scales for p in s if len(p) < d})
    rho_x = dict(zip(partial, _patch_rdms(spec, X, partial, config.block_size)))
    if Z is None:
        rho_z = rho_x
    else:
        rho_z = dict(zip(partial, _patch_rdms(spec, Z, partial, config.block_size)))
    full = None
    m = X.shape[0] if Z is None else Z.shape[0]
    K = np.zeros((X.shape[0], m))
    for alpha, scale in zip(ss.alphas, ss.scales):
        Ks = np.zeros_like(K)
        for p in scale:
            if len(p) == d:
                if full is None:
                    if Z is None:
                        full = _overlap_gram(spec, X, config.block_size)
                    else:
                        full = _cross_overlap(spec, X, Z, None, config.block_size)
                Ks = Ks + full
            else:
                Ks = Ks + _hs_gram(rho_x[p], rho_z[p], rowwise=Z is not None)
        K = K + alpha * (Ks / len(scale))
    return K


def multiscale_kernel(X, config: KernelConfig, normalize: bool = True) -> GramMatrix:
    """Convex mix of per-scale kernels, then unit-diagonal normalization and symmetrization."""
    X = _check_X(X)
    K = _multiscale_raw(X, config)
    g = GramMatrix(K, config.describe(X.shape[1]))
    if normalize:
        g = unit_diag_normalize(g)
    return symmetrize(g)


def compute_kernel(X, config: KernelConfig) -> GramMatrix:
    """Dispatch on ``config.family``."""
    X = _check_X(X)
    if config.family is KernelFamily.BASELINE:
        g = baseline_kernel_from_features(X, config.feature_map, config.block_size)
        g.meta.update(config.describe(X.shape[1]))
        return g
    if config.family is KernelFamily.MULTISCALE:
        return multiscale_kernel(X, config)
    return local_kernel(X, config)


# ---------------------------------------------------------------------------
# cross kernels and Nystrom


def _rowwise(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """``A @ B.conj().T`` one row at a time, so each entry's rounding is fixed."""
    Bh = B.conj()
    return np.stack([Bh @ a for a in A])


def _cross_overlap(spec, X, Z, patch, chunk_size) -> np.ndarray:
    enc = _encoder(spec, patch)
    SZ = enc(Z)
    out = np.empty((X.shape[0], Z.shape[0]))
    for blk in _blocks(X.shape[0], chunk_size):
        SX = enc(X[blk])
        out[blk] = np.abs(_rowwise(SX, SZ)) ** 2
    return out


def _cross_rdm(spec, X, Z, patches, metric, weights, chunk_size, block_size) -> np.ndarray:
    d = X.shape[1]
    out = np.zeros((X.shape[0], Z.shape[0]))
    dense = [p for p in patches if not (len(p) == d and d > MAX_DENSE_RDM_QUBITS)]
    rz = dict(zip(dense, _patch_rdms(spec, Z, dense, block_size)))
    sqz = {}
    for blk in _blocks(X.shape[0], chunk_size):
        rx_blk = dict(zip(dense, _patch_rdms(spec, X[blk], dense, block_size)))
        acc = np.zeros((blk.stop - blk.start, Z.shape[0]))
        for w, p in zip(weights, patches):
            if p not in rz:
                G = _cross_overlap(spec, X[blk], Z, None, chunk_size)
            elif metric is RdmMetric.HS:
                G = _hs_gram(rx_blk[p], rz[p], rowwise=True)
            else:
                if p not in sqz:
                    sqz[p] = psd_sqrt(rz[p])
                a = rx_blk[p]
                i, j = np.meshgrid(np.arange(a.shape[0]), np.arange(Z.shape[0]), indexing="ij")
                f = fidelity_batch(sqz[p][j.ravel()], a[i.ravel()])
                G = f.reshape(a.shape[0], Z.shape[0])
            acc = acc + w * G
        out[blk] = acc
    return out


def cross_kernel(X, Z, config: KernelConfig, chunk_size: int = 64) -> np.ndarray:
    """Raw similarities ``k(x_i, z_j)`` between samples and landmarks.

    Uses the same per-pair similarity as the square construction for the
    configured family, without any Gram-level post-processing. RDM pairs use
    the raw metric value (no unit-diagonal pinning).
    """
    X = _check_X(X)
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or Z.shape[0] == 0:
        raise ValueError("landmark set must be nonempty")
    Z = _check_X(Z, X.shape[1])
    if chunk_size < 1:
        raise ValueError("chunk_size must be positive")
    d = X.shape[1]
    spec = config.feature_map
    fam = config.family
    if fam is KernelFamily.BASELINE:
        return _cross_overlap(spec, X, Z, None, chunk_size)
    if fam is KernelFamily.LOCAL_SUBCIRCUIT:
        ps = config.patches_for(d)
        out = np.zeros((X.shape[0], Z.shape[0]))
        for w, p in zip(ps.weights, ps.patches):
            out = out + w * _cross_overlap(spec, X, Z, p, chunk_size)
        return out
    if fam is KernelFamily.LOCAL_RDM:
        ps = config.patches_for(d)
        return _cross_rdm(
            spec, X, Z, ps.patches, config.rdm_metric, ps.weights, chunk_size, config.block_size
        )
    out = np.empty((X.shape[0], Z.shape[0]))
    for blk in _blocks(X.shape[0], chunk_size):
        out[blk] = _multiscale_raw(X[blk], config, Z)
    return out


def nystrom_features(C, W, rcond: float = 1e-10) -> np.ndarray:
    """Explicit features ``Phi = C W^{-1/2}`` with a pseudo-inverse square root.

    Eigenvalues of ``W`` at or below ``rcond * lambda_max`` are dropped, so
    ``Phi @ Phi.T == C @ pinv(W) @ C.T`` with the same cutoff.
    """
    C = np.asarray(C, dtype=float)
    W = np.asarray(W, dtype=float)
    _square(W)
    if C.ndim != 2 or C.shape[1] != W.shape[0] or W.shape[0] < 1:
        raise ValueError(f"shape mismatch: C {C.shape}, W {W.shape}")
    if np.max(np.abs(W - W.T)) > 1e-8 * max(1.0, np.max(np.abs(W))):
        raise ValueError("landmark Gram matrix W must be symmetric")
    es = hermitian_eig(W)
    lam, V = es.eigenvalues, es.eigenvectors
    lam_max = lam[0]
    if not lam_max > 0:
        raise ValueError("landmark Gram matrix has no eigenvalue above the cutoff")
    keep = lam > rcond * lam_max
    inv_sqrt = (V[:, keep] / np.sqrt(lam[keep])) @ V[:, keep].T
    return C @ inv_sqrt


# ---------------------------------------------------------------------------
# persistence


def save_gram(gram: GramMatrix, stem: str | Path, extra: dict | None = None) -> tuple[Path, Path]:
    """Write ``<stem>.json`` (header) and ``<stem>.bin`` (little-endian float64, row-major)."""
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    K = np.ascontiguousarray(gram.entries, dtype="<f8")
    n, m = K.shape
    header = {"n": n, "m": m, "dtype": "float64", "byte_order": "little", "order": "row-major"}
    header.update(gram.meta)
    if extra:
        header.update(extra)
    header_path = stem.with_suffix(".json")
    bin_path = stem.with_suffix(".bin")
    bin_path.write_bytes(K.tobytes(order="C"))
    header["data_file"] = bin_path.name
    header_path.write_text(json.dumps(header, indent=2, sort_keys=True))
    return header_path, bin_path


def load_gram(path: str | Path) -> GramMatrix:
    """Load a Gram matrix from its header (``.json``), binary (``.bin``) or common stem."""
    path = Path(path)
    header_path = path.with_suffix(".json")
    header = json.loads(header_path.read_text())
    bin_path = header_path.with_name(header.get("data_file", path.with_suffix(".bin").name))
    n = int(header["n"])
    m = int(header.get("m", n))
    raw = np.frombuffer(bin_path.read_bytes(), dtype="<f8")
    if raw.size != n * m:
        raise ValueError(f"{bin_path}: expected {n * m} values, found {raw.size}")
    meta = {k: v for k, v in header.items() if k not in {"n", "m", "dtype", "byte_order", "order", "data_file"}}
    return GramMatrix(raw.reshape(n, m).astype(float), meta)
