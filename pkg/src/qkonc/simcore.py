"""Exact pure-state simulation and small dense linear algebra.

Qubit ordering is little-endian throughout the package: qubit 0 is the least
significant bit of the amplitude index, so the basis state ``|b_{d-1} ... b_1 b_0>``
sits at index ``sum_q b_q * 2**q``. Reduced density matrices follow the same
rule with respect to the order of the kept qubits: ``keep[0]`` becomes the
least significant bit of the reduced index.

Most functions come in two flavours. The public, single-object functions
(``apply_1q_gate``, ``partial_trace``, ...) operate on :class:`Statevector` and
:class:`DensityMatrix` values. The batched helpers (``*_batch``) work on raw
``(batch, 2**d)`` arrays and are what the kernel constructions use.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

__all__ = [
    "Statevector",
    "DensityMatrix",
    "HermitianEigenSystem",
    "EigenConvergenceError",
    "zero_state",
    "apply_1q_gate",
    "apply_2q_phase_gate",
    "inner_product",
    "partial_trace",
    "hermitian_eig",
    "psd_sqrt",
    "uhlmann_fidelity",
    "hs_inner",
    "H_GATE",
    "rx",
    "rz",
    "phase",
]

NORM_TOL = 1e-10
HERMITIAN_TOL = 1e-8
EIG_CLAMP = 1e-12

H_GATE = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)


def rx(theta):
    """Rx rotation, ``exp(-i theta X / 2)``; broadcasts over ``theta``."""
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta / 2)
    s = -1j * np.sin(theta / 2)
    return np.stack([np.stack([c, s], -1), np.stack([s, c], -1)], -2).astype(complex)


def rz(theta):
    """Rz rotation, ``exp(-i theta Z / 2)``; broadcasts over ``theta``."""
    theta = np.asarray(theta, dtype=float)
    zero = np.zeros_like(theta, dtype=complex)
    a = np.exp(-0.5j * theta)
    b = np.exp(0.5j * theta)
    return np.stack([np.stack([a, zero], -1), np.stack([zero, b], -1)], -2)


def phase(theta):
    """Phase gate ``diag(1, exp(i theta))``; broadcasts over ``theta``."""
    theta = np.asarray(theta, dtype=float)
    one = np.ones_like(theta, dtype=complex)
    zero = np.zeros_like(theta, dtype=complex)
    return np.stack([np.stack([one, zero], -1), np.stack([zero, np.exp(1j * theta)], -1)], -2)


class EigenConvergenceError(RuntimeError):
    """Raised when the Jacobi iteration exhausts its sweep budget."""

    def __init__(self, residual: float, sweeps: int):
        self.residual = residual
        self.sweeps = sweeps
        super().__init__(
            f"Jacobi eigensolver did not converge after {sweeps} sweeps "
            f"(off-diagonal residual {residual:.3e})"
        )


@dataclass(frozen=True)
class Statevector:
    """A normalized pure state of ``num_qubits`` qubits."""

    amplitudes: np.ndarray
    num_qubits: int = field(init=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        d = int(round(np.log2(amps.size))) if amps.size else -1
        if d < 0 or 2**d != amps.size:
            raise ValueError(f"amplitude vector length {amps.size} is not a power of two")
        if d < 1:
            raise ValueError("a statevector needs at least one qubit")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "num_qubits", d)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """A ``2**k x 2**k`` density matrix. Validity is checked by :meth:`validate`."""

    entries: np.ndarray
    num_qubits: int = field(init=False)

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        k = int(round(np.log2(m.shape[0]))) if m.shape[0] else -1
        if k < 1 or 2**k != m.shape[0]:
            raise ValueError(f"density matrix dimension {m.shape[0]} is not 2**k with k >= 1")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "num_qubits", k)

    def validate(self, tol: float = 1e-8) -> None:
        m = self.entries
        if np.max(np.abs(m - m.conj().T)) > tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > tol:
            raise ValueError(f"density matrix trace {np.trace(m).real:.6g} != 1")
        lam = hermitian_eig(m).eigenvalues
        if lam[-1] < -tol:
            raise ValueError(f"density matrix has negative eigenvalue {lam[-1]:.3e}")


@dataclass(frozen=True)
class HermitianEigenSystem:
    """Eigenvalues in descending order and the matching unitary eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0
    residual: float = 0.0

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues[..., None, :]) @ np.swapaxes(v.conj(), -1, -2)


# ---------------------------------------------------------------------------
# gates


@lru_cache(maxsize=None)
def basis_bits(d: int) -> np.ndarray:
    """``(d, 2**d)`` int8 table, row ``q`` holds bit ``q`` of each basis index."""
    idx = np.arange(2**d)
    bits = ((idx[None, :] >> np.arange(d)[:, None]) & 1).astype(np.int8)
    bits.setflags(write=False)
    return bits


def zero_state(d: int) -> Statevector:
    amps = np.zeros(2**d, dtype=complex)
    amps[0] = 1.0
    return Statevector(amps)


def _num_qubits_of(psi: np.ndarray) -> int:
    return int(psi.shape[-1]).bit_length() - 1


def apply_1q_batch(psi: np.ndarray, qubit: int, gate: np.ndarray) -> np.ndarray:
    """Apply a single-qubit gate to every row of ``psi``.

    ``gate`` is either one ``(2, 2)`` matrix or a ``(batch, 2, 2)`` stack with one
    gate per row.
    """
    b, dim = psi.shape
    d = _num_qubits_of(psi)
    view = psi.reshape(b, 2 ** (d - 1 - qubit), 2, 2**qubit)
    if gate.ndim == 2:
        out = np.einsum("ij,bhjl->bhil", gate, view)
    else:
        out = np.einsum("bij,bhjl->bhil", gate, view)
    return out.reshape(b, dim)


def apply_cz_batch(psi: np.ndarray, q1: int, q2: int) -> np.ndarray:
    bits = basis_bits(_num_qubits_of(psi))
    sign = 1 - 2 * (bits[q1] & bits[q2]).astype(float)
    return psi * sign


def apply_cx_batch(psi: np.ndarray, control: int, target: int) -> np.ndarray:
    bits = basis_bits(_num_qubits_of(psi))
    idx = np.arange(psi.shape[-1])
    src = idx ^ (bits[control].astype(np.int64) << target)
    return psi[:, src]


def apply_rzz_batch(psi: np.ndarray, q1: int, q2: int, theta) -> np.ndarray:
    """RZZ(theta) = exp(-i theta/2 Z⊗Z); ``theta`` is a scalar or one angle per row."""
    bits = basis_bits(_num_qubits_of(psi))
    parity = 1.0 - 2.0 * (bits[q1] ^ bits[q2])
    theta = np.asarray(theta, dtype=float).reshape(-1, 1)
    return psi * np.exp(-0.5j * theta * parity[None, :])


def _check_qubit(q: int, d: int) -> None:
    if not 0 <= q < d:
        raise IndexError(f"qubit index {q} out of range for {d} qubits")


def apply_1q_gate(
    state: Statevector, qubit: int, gate: np.ndarray, check_unitary: bool = False
) -> Statevector:
    """Return ``state`` with ``gate`` applied on ``qubit``."""
    gate = np.asarray(gate, dtype=complex)
    if gate.shape != (2, 2):
        raise ValueError(f"expected a 2x2 gate, got shape {gate.shape}")
    _check_qubit(qubit, state.num_qubits)
    if check_unitary and np.max(np.abs(gate.conj().T @ gate - np.eye(2))) > NORM_TOL:
        raise ValueError("gate is not unitary")
    psi = apply_1q_batch(state.amplitudes[None, :], qubit, gate)
    return Statevector(psi[0])


def apply_2q_phase_gate(
    state: Statevector, q1: int, q2: int, kind: str, theta: float | None = None
) -> Statevector:
    """Apply ``CZ``, ``CX`` (``q1`` controls ``q2``) or ``RZZ(theta)``."""
    d = state.num_qubits
    _check_qubit(q1, d)
    _check_qubit(q2, d)
    if q1 == q2:
        raise ValueError("two-qubit gate needs distinct qubits")
    psi = state.amplitudes[None, :]
    kind = kind.upper()
    if kind == "CZ":
        out = apply_cz_batch(psi, q1, q2)
    elif kind == "CX":
        out = apply_cx_batch(psi, q1, q2)
    elif kind == "RZZ":
        if theta is None:
            raise ValueError("RZZ requires an angle")
        out = apply_rzz_batch(psi, q1, q2, theta)
    else:
        raise ValueError(f"unknown two-qubit gate {kind!r}")
    return Statevector(out[0])


def inner_product(a: Statevector, b: Statevector) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"dimension mismatch: {a.num_qubits} vs {b.num_qubits} qubits")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


# ---------------------------------------------------------------------------
# reduced states


def _check_keep(keep: Sequence[int], d: int) -> tuple[int, ...]:
    keep = tuple(int(q) for q in keep)
    if not keep:
        raise ValueError("keep set must be nonempty")
    if len(set(keep)) != len(keep):
        raise ValueError(f"duplicate qubit indices in {keep}")
    for q in keep:
        _check_qubit(q, d)
    return keep


def reduced_density_batch(psi: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrices ``(batch, 2**k, 2**k)`` of each row of ``psi``."""
    b = psi.shape[0]
    d = _num_qubits_of(psi)
    keep = _check_keep(keep, d)
    k = len(keep)
    rest = [q for q in range(d - 1, -1, -1) if q not in keep]
    # tensor axis 1 + (d - 1 - q) holds qubit q; most significant kept qubit first
    axes = [1 + d - 1 - q for q in reversed(keep)] + [1 + d - 1 - q for q in rest]
    m = psi.reshape((b,) + (2,) * d).transpose([0] + axes).reshape(b, 2**k, 2 ** (d - k))
    return m @ np.swapaxes(m.conj(), 1, 2)


def partial_trace(state: Statevector, keep: Sequence[int]) -> DensityMatrix:
    """Trace out every qubit not listed in ``keep``."""
    rho = reduced_density_batch(state.amplitudes[None, :], keep)[0]
    return DensityMatrix(0.5 * (rho + rho.conj().T))


def hs_inner(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Hilbert-Schmidt inner product ``Tr(rho sigma)`` for Hermitian arguments."""
    a, b = rho.entries, sigma.entries
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    # sum of Re(a_ij conj(b_ij)) is exactly symmetric in (a, b)
    return float(np.sum(a.real * b.real + a.imag * b.imag))


# ---------------------------------------------------------------------------
# eigensolver


@lru_cache(maxsize=None)
def _round_robin(n: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """Disjoint pivot pairs for a parallel-ordered cyclic Jacobi sweep.

    Every unordered pair ``(p, q)`` appears exactly once across the rounds.
    """
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for i in range(m // 2):
            p, q = players[i], players[m - 1 - i]
            if p < n and q < n:
                ps.append(min(p, q))
                qs.append(max(p, q))
        if ps:
            rounds.append((np.array(ps), np.array(qs)))
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(rounds)


_TINY = np.finfo(float).tiny


def _offdiag_norm(a: np.ndarray) -> np.ndarray:
    n = a.shape[-1]
    mask = ~np.eye(n, dtype=bool)
    return np.sqrt(np.sum(np.abs(a[:, mask]) ** 2, axis=-1))


def _jacobi(a: np.ndarray, tol: float, max_sweeps: int):
    """Cyclic Jacobi on a stack ``(batch, n, n)`` of Hermitian matrices.

    All ``n // 2`` rotations of one round act on disjoint index pairs, so they
    commute and are applied together as column and row updates.
    """
    b, n, _ = a.shape
    is_complex = np.iscomplexobj(a)
    v = np.broadcast_to(np.eye(n, dtype=a.dtype), a.shape).copy()
    scale = np.maximum(1.0, np.sqrt(np.sum(np.abs(a) ** 2, axis=(1, 2))))
    rows = np.arange(b)[:, None]
    sweeps = 0
    off = _offdiag_norm(a) if n > 1 else np.zeros(b)
    while np.any(off > tol * scale):
        if sweeps >= max_sweeps:
            raise EigenConvergenceError(float(np.max(off / scale)), sweeps)
        for p, q in _round_robin(n):
            app = a[:, p, p].real
            aqq = a[:, q, q].real
            apq = a[:, p, q]
            if is_complex:
                # subnormal pivots are dropped; complex division by them overflows
                r = np.abs(apq)
                nz = r > _TINY
                safe = np.where(nz, r, 1.0)
                ph = np.where(nz, apq.real / safe + 1j * (apq.imag / safe), 1.0)
            else:
                r = apq
                nz = np.abs(r) > _TINY
                ph = None
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                tau = np.where(nz, (aqq - app) / (2.0 * np.where(nz, r, 1.0)), 0.0)
                sgn = np.where(tau >= 0.0, 1.0, -1.0)
                t = np.where(nz, sgn / (np.abs(tau) + np.sqrt(1.0 + tau * tau)), 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            if is_complex:
                upp, upq = c, s
                uqp, uqq = -s * ph.conj(), c * ph.conj()
            else:
                upp, upq, uqp, uqq = c, s, -s, c

            # A <- A U, V <- V U
            for m in (a, v):
                cp = m[:, :, p]
                cq = m[:, :, q]
                m[:, :, p] = cp * upp[:, None, :] + cq * uqp[:, None, :]
                m[:, :, q] = cp * upq[:, None, :] + cq * uqq[:, None, :]
            # A <- U^H A
            rp = a[:, p, :]
            rq = a[:, q, :]
            if is_complex:
                a[:, p, :] = upp[:, :, None] * rp + uqp.conj()[:, :, None] * rq
                a[:, q, :] = upq[:, :, None] * rp + uqq.conj()[:, :, None] * rq
            else:
                a[:, p, :] = upp[:, :, None] * rp + uqp[:, :, None] * rq
                a[:, q, :] = upq[:, :, None] * rp + uqq[:, :, None] * rq
            a[rows, p, q] = 0.0
            a[rows, q, p] = 0.0
        sweeps += 1
        off = _offdiag_norm(a)
    lam = np.real(np.diagonal(a, axis1=1, axis2=2)).copy()
    order = np.argsort(-lam, axis=1, kind="stable")
    lam = np.take_along_axis(lam, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    residual = float(np.max(off / scale)) if b else 0.0
    return lam, v, sweeps, residual


def hermitian_eig(
    m: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100, check: bool = True
) -> HermitianEigenSystem:
    """Full eigensystem of a Hermitian (or real symmetric) matrix by cyclic Jacobi.

    Accepts a single ``(n, n)`` matrix or a stack ``(..., n, n)``. Iteration stops
    once the off-diagonal Frobenius mass falls below ``tol`` times
    ``max(1, ||m||_F)``. Eigenvalues are returned in descending order.
    """
    m = np.asarray(m)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise ValueError(f"expected square matrix, got shape {m.shape}")
    if not np.iscomplexobj(m):
        m = m.astype(float)
    else:
        m = m.astype(complex)
    herm_err = np.max(np.abs(m - np.swapaxes(m.conj(), -1, -2))) if m.size else 0.0
    if check and herm_err > HERMITIAN_TOL * max(1.0, float(np.max(np.abs(m), initial=0.0))):
        raise ValueError(f"matrix is not Hermitian (max asymmetry {herm_err:.3e})")
    lead = m.shape[:-2]
    n = m.shape[-1]
    a = 0.5 * (m + np.swapaxes(m.conj(), -1, -2))
    a = a.reshape((-1, n, n)).copy()
    lam, v, sweeps, residual = _jacobi(a, tol, max_sweeps)
    return HermitianEigenSystem(
        lam.reshape(lead + (n,)), v.reshape(lead + (n, n)), sweeps, residual
    )


def psd_sqrt(m: np.ndarray, clamp: float = EIG_CLAMP) -> np.ndarray:
    """Matrix square root of a PSD matrix (or stack), eigenvalues below ``clamp`` zeroed."""
    es = hermitian_eig(m)
    lam = np.where(es.eigenvalues < clamp, 0.0, es.eigenvalues)
    v = es.eigenvectors
    return (v * np.sqrt(lam)[..., None, :]) @ np.swapaxes(v.conj(), -1, -2)


def fidelity_batch(sqrt_rho: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Squared Uhlmann fidelity for stacks, given precomputed ``sqrt(rho)``."""
    inner = sqrt_rho @ sigma @ sqrt_rho
    lam = hermitian_eig(inner, check=False).eigenvalues
    lam = np.where(lam < EIG_CLAMP, 0.0, lam)
    f = np.sum(np.sqrt(lam), axis=-1) ** 2
    return np.clip(f, 0.0, 1.0)


def uhlmann_fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Squared Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``.

    Reduces to ``|<a|b>|**2`` for pure states.
    """
    if rho.entries.shape != sigma.entries.shape:
        raise ValueError(f"dimension mismatch: {rho.entries.shape} vs {sigma.entries.shape}")
    for name, dm in (("rho", rho), ("sigma", sigma)):
        try:
            dm.validate()
        except ValueError as exc:
            raise ValueError(f"{name}: {exc}") from None
    return float(fidelity_batch(psd_sqrt(rho.entries)[None], sigma.entries[None])[0])
