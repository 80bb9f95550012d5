"""Kernel geometry statistics: off-diagonal percentiles, effective rank, centered alignment."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .simcore import hermitian_eig

__all__ = [
    "DiagnosticsReport",
    "offdiag_percentiles",
    "spectrum",
    "effective_rank",
    "centered_alignment",
    "diagnose",
]


@dataclass
class DiagnosticsReport:
    p50: float
    p95: float
    effective_rank: float
    alignment: float | None
    spectrum: np.ndarray

    def row(self) -> dict:
        """Scalar fields with the CSV column names used by the sweep output."""
        return {
            "p50": self.p50,
            "p95": self.p95,
            "eff_rank": self.effective_rank,
            "alignment": self.alignment,
        }

    def to_dict(self) -> dict:
        out = asdict(self)
        out["spectrum"] = [float(v) for v in self.spectrum]
        return out


def _square(K) -> np.ndarray:
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {K.shape}")
    return K


def offdiag_percentiles(K, q=(50.0, 95.0)) -> tuple[float, ...]:
    """Percentiles (linear interpolation) of the off-diagonal entries, both triangles included."""
    K = _square(K)
    n = K.shape[0]
    if n < 2:
        raise ValueError("need n >= 2 for off-diagonal statistics")
    off = K[~np.eye(n, dtype=bool)]
    return tuple(float(v) for v in np.percentile(off, q, method="linear"))


def spectrum(K, normalize: bool = True) -> np.ndarray:
    """Descending eigenvalues of the symmetrized kernel, negatives clipped to 0.

    With ``normalize`` the values are divided by their sum.
    """
    K = _square(K)
    lam = hermitian_eig(0.5 * (K + K.T)).eigenvalues
    lam = np.clip(lam, 0.0, None)
    if normalize:
        total = lam.sum()
        if not total > 0:
            raise ValueError("kernel spectrum is identically zero")
        lam = lam / total
    return lam


def effective_rank(K) -> float:
    """``exp`` of the Shannon entropy of the trace-normalized spectrum."""
    p = spectrum(K, normalize=True)
    p = p[p > 0]
    return float(np.exp(-np.sum(p * np.log(p))))


def _center(M: np.ndarray) -> np.ndarray:
    return M - M.mean(axis=0, keepdims=True) - M.mean(axis=1, keepdims=True) + M.mean()


def centered_alignment(K, y) -> float:
    """Centered kernel-target alignment against the one-hot label kernel ``Y Y^T``."""
    K = _square(K)
    y = np.asarray(y).ravel()
    n = K.shape[0]
    if y.size != n:
        raise ValueError(f"{y.size} labels for a {n}x{n} kernel")
    if n < 2:
        raise ValueError("need n >= 2 for alignment")
    classes, codes = np.unique(y, return_inverse=True)
    if classes.size < 2:
        raise ValueError("alignment needs at least two classes")
    Y = np.eye(classes.size)[codes]
    Lc = _center(Y @ Y.T)
    Kc = _center(K)
    nk = np.linalg.norm(Kc)
    if nk == 0:
        raise ValueError("centered kernel is zero")
    return float(np.sum(Kc * Lc) / (nk * np.linalg.norm(Lc)))


def diagnose(K, y=None) -> DiagnosticsReport:
    K = _square(K)
    p50, p95 = offdiag_percentiles(K)
    lam = spectrum(K)
    p = lam[lam > 0]
    reff = float(np.exp(-np.sum(p * np.log(p))))
    align = centered_alignment(K, y) if y is not None else None
    return DiagnosticsReport(p50, p95, reff, align, lam)
