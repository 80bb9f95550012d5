"""ZZ-style data-encoding circuits, simulated exactly.

Three families are provided:

``zz_manual``
    per layer: ``Rx(x_i)`` on every qubit, then ``CZ`` on every entangling pair.
``zz_manual_canonical``
    one initial Hadamard layer, then per layer ``Rz(2 x_i)`` on every qubit and
    ``RZZ(2 (pi - x_i)(pi - x_j))`` on every entangling pair.
``zz_qiskit``
    per layer: ``H`` on every qubit, ``P(2 x_i)`` on every qubit, then for each
    pair ``CX(i, j) . P(2 (pi - x_i)(pi - x_j)) on j . CX(i, j)``.

Circuits are replicated gate by gate; nothing is compiled into a closed-form
phase so the gate sequence stays auditable against the dense-matrix tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .simcore import (
    H_GATE,
    Statevector,
    apply_1q_batch,
    apply_cx_batch,
    apply_cz_batch,
    apply_rzz_batch,
    phase,
    rx,
    rz,
)

__all__ = [
    "FeatureMapFamily",
    "Entanglement",
    "FeatureMapSpec",
    "entangling_pairs",
    "encode",
    "encode_batch",
    "encode_patch",
    "encode_patch_batch",
]


class FeatureMapFamily(str, Enum):
    ZZ_MANUAL = "zz_manual"
    ZZ_MANUAL_CANONICAL = "zz_manual_canonical"
    ZZ_QISKIT = "zz_qiskit"


class Entanglement(str, Enum):
    LINEAR = "linear"
    RING = "ring"


@dataclass(frozen=True)
class FeatureMapSpec:
    family: FeatureMapFamily = FeatureMapFamily.ZZ_MANUAL
    depth: int = 1
    entanglement: Entanglement = Entanglement.LINEAR

    def __post_init__(self):
        object.__setattr__(self, "family", FeatureMapFamily(self.family))
        object.__setattr__(self, "entanglement", Entanglement(self.entanglement))
        if int(self.depth) != self.depth or self.depth < 1:
            raise ValueError(f"depth must be a positive integer, got {self.depth}")
        object.__setattr__(self, "depth", int(self.depth))

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "depth": self.depth,
            "entanglement": self.entanglement.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FeatureMapSpec":
        return cls(data["family"], int(data["depth"]), data["entanglement"])


def entangling_pairs(pattern: Entanglement | str, d: int) -> list[tuple[int, int]]:
    """Nearest-neighbour pairs; ``ring`` adds the wrap-around pair ``(d-1, 0)``."""
    pattern = Entanglement(pattern)
    if pattern is Entanglement.LINEAR:
        if d < 2:
            raise ValueError(f"linear entanglement needs d >= 2, got {d}")
        return [(i, i + 1) for i in range(d - 1)]
    if d < 3:
        raise ValueError(f"ring entanglement needs d >= 3, got {d}")
    return [(i, i + 1) for i in range(d - 1)] + [(d - 1, 0)]


def _pairs_for(spec: FeatureMapSpec, d: int) -> list[tuple[int, int]]:
    if d == 1:
        return []
    # a two-qubit ring would repeat the single linear pair
    if spec.entanglement is Entanglement.RING and d == 2:
        raise ValueError("ring entanglement needs at least 3 qubits")
    return entangling_pairs(spec.entanglement, d)


def _check_features(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] < 1:
        raise ValueError(f"features must be a (n, d) array with d >= 1, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("features contain non-finite values")
    return X


def encode_batch(spec: FeatureMapSpec, X) -> np.ndarray:
    """Encode every row of ``X`` (shape ``(n, d)``) into a ``(n, 2**d)`` state array."""
    X = _check_features(X)
    n, d = X.shape
    pairs = _pairs_for(spec, d)
    psi = np.zeros((n, 2**d), dtype=complex)
    psi[:, 0] = 1.0
    family = spec.family

    if family is FeatureMapFamily.ZZ_MANUAL:
        for _ in range(spec.depth):
            for q in range(d):
                psi = apply_1q_batch(psi, q, rx(X[:, q]))
            for i, j in pairs:
                psi = apply_cz_batch(psi, i, j)

    elif family is FeatureMapFamily.ZZ_MANUAL_CANONICAL:
        for q in range(d):
            psi = apply_1q_batch(psi, q, H_GATE)
        for _ in range(spec.depth):
            for q in range(d):
                psi = apply_1q_batch(psi, q, rz(2.0 * X[:, q]))
            for i, j in pairs:
                psi = apply_rzz_batch(psi, i, j, 2.0 * (np.pi - X[:, i]) * (np.pi - X[:, j]))

    else:
        for _ in range(spec.depth):
            for q in range(d):
                psi = apply_1q_batch(psi, q, H_GATE)
            for q in range(d):
                psi = apply_1q_batch(psi, q, phase(2.0 * X[:, q]))
            for i, j in pairs:
                psi = apply_cx_batch(psi, i, j)
                psi = apply_1q_batch(psi, j, phase(2.0 * (np.pi - X[:, i]) * (np.pi - X[:, j])))
                psi = apply_cx_batch(psi, i, j)
    return psi


def encode(spec: FeatureMapSpec, x: Sequence[float]) -> Statevector:
    """Encoded state ``U(x)|0...0>`` for a single feature vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-D feature vector, got shape {x.shape}")
    return Statevector(encode_batch(spec, x[None, :])[0])


def _check_patch(patch: Sequence[int], d: int) -> list[int]:
    patch = [int(q) for q in patch]
    if not patch:
        raise ValueError("patch must be nonempty")
    if len(set(patch)) != len(patch):
        raise ValueError(f"duplicate indices in patch {patch}")
    for q in patch:
        if not 0 <= q < d:
            raise IndexError(f"patch index {q} out of range for d={d}")
    return patch


def encode_patch_batch(spec: FeatureMapSpec, X, patch: Sequence[int]) -> np.ndarray:
    """Encode the feature subvectors ``X[:, patch]`` on a fresh ``len(patch)``-qubit circuit."""
    X = _check_features(X)
    patch = _check_patch(patch, X.shape[1])
    if spec.entanglement is Entanglement.RING and len(patch) < 3:
        # a ring on fewer than three qubits collapses to the linear pattern
        spec = FeatureMapSpec(spec.family, spec.depth, Entanglement.LINEAR)
    return encode_batch(spec, X[:, patch])


def encode_patch(spec: FeatureMapSpec, x: Sequence[float], patch: Sequence[int]) -> Statevector:
    x = np.asarray(x, dtype=float)
    return Statevector(encode_patch_batch(spec, x[None, :], patch)[0])
