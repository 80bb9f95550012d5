"""Randomized invariants checked with hypothesis."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qkonc.data import make_splits
from qkonc.diagnostics import centered_alignment, effective_rank, offdiag_percentiles
from qkonc.featuremaps import FeatureMapSpec, encode
from qkonc.kernels import KernelConfig, local_kernel, psd_clip, symmetrize, unit_diag_normalize
from qkonc.learn import svm_predict, svm_train
from qkonc.simcore import DensityMatrix, hermitian_eig, hs_inner, partial_trace, uhlmann_fidelity

FAST = settings(max_examples=40, deadline=None)
angles = st.floats(-np.pi, np.pi, allow_nan=False)
families = st.sampled_from(["zz_manual", "zz_manual_canonical", "zz_qiskit"])


def features(d):
    return st.lists(angles, min_size=d, max_size=d)


@st.composite
def encoded(draw, min_d=2, max_d=6):
    d = draw(st.integers(min_d, max_d))
    spec = FeatureMapSpec(draw(families), draw(st.integers(1, 2)), "ring" if d >= 3 and draw(st.booleans()) else "linear")
    return spec, encode(spec, draw(features(d)))


@st.composite
def psd_matrix(draw, lo=2, hi=8):
    n = draw(st.integers(lo, hi))
    r = draw(st.integers(1, n))
    A = draw(arrays(float, (n, r), elements=st.floats(-2, 2)))
    return A @ A.T


@FAST
@given(encoded())
def test_encoding_preserves_norm(case):
    _, psi = case
    assert abs(psi.norm() - 1) < 1e-12


@FAST
@given(encoded(), st.data())
def test_partial_trace_is_a_state(case, data):
    _, psi = case
    d = psi.num_qubits
    keep = data.draw(st.lists(st.integers(0, d - 1), min_size=1, max_size=d, unique=True))
    rho = partial_trace(psi, keep)
    rho.validate(tol=1e-10)
    purity = hs_inner(rho, rho)
    assert 2.0 ** -len(keep) - 1e-12 <= purity <= 1 + 1e-12


@FAST
@given(encoded(3, 5), st.data())
def test_hs_symmetric_and_fidelity_bounded(case, data):
    spec, psi = case
    d = psi.num_qubits
    phi = encode(spec, data.draw(features(d)))
    keep = sorted(data.draw(st.sets(st.integers(0, d - 1), min_size=1, max_size=2)))
    a, b = partial_trace(psi, keep), partial_trace(phi, keep)
    assert hs_inner(a, b) == hs_inner(b, a)
    f = uhlmann_fidelity(a, b)
    assert -1e-12 <= f <= 1 + 1e-12


@FAST
@given(psd_matrix())
def test_eig_trace_and_reconstruction(K):
    es = hermitian_eig(K)
    assert abs(es.eigenvalues.sum() - np.trace(K)) <= 1e-9 * max(1, np.abs(K).sum())
    np.testing.assert_allclose(es.reconstruct(), K, atol=1e-9 * max(1, np.abs(K).max()))
    assert np.all(np.diff(es.eigenvalues) <= 1e-12)


@FAST
@given(st.integers(3, 200), st.integers(0, 2**63))
def test_splits_disjoint_cover(n, seed):
    try:
        sp = make_splits(n, seed)
    except ValueError:
        return  # too small for a nonempty split at these ratios
    assert sorted(sp.train + sp.val + sp.test) == list(range(n))


@FAST
@given(psd_matrix(), st.floats(1e-3, 1e3))
def test_effective_rank_scale_invariant(K, c):
    if np.trace(K) < 1e-6:
        return
    assert abs(effective_rank(c * K) - effective_rank(K)) < 1e-7


@FAST
@given(psd_matrix(4, 8), st.floats(-5, 5), st.data())
def test_alignment_invariant_to_constant_shift(K, c, data):
    n = K.shape[0]
    y = np.array(data.draw(st.lists(st.integers(0, 2), min_size=n, max_size=n)))
    H = np.eye(n) - 1 / n
    if len(set(y)) < 2 or np.linalg.norm(H @ K @ H) < 1e-6:
        return
    assert abs(centered_alignment(K + c, y) - centered_alignment(K, y)) < 1e-8


@FAST
@given(psd_matrix(3, 8), st.randoms(use_true_random=False))
def test_percentiles_invariant_to_relabeling(K, rnd):
    perm = list(range(K.shape[0]))
    rnd.shuffle(perm)
    P = K[np.ix_(perm, perm)]
    np.testing.assert_allclose(offdiag_percentiles(P), offdiag_percentiles(K), atol=1e-15)


@FAST
@given(psd_matrix(4, 8), st.sampled_from([0.1, 1.0, 10.0]), st.data())
def test_svm_label_flip(K, C, data):
    n = K.shape[0]
    y = np.array(data.draw(st.lists(st.sampled_from([-1.0, 1.0]), min_size=n, max_size=n)))
    if len(set(y)) < 2:
        return
    K = K + 1e-3 * np.eye(n)
    _, d1 = svm_predict(svm_train(K, y, C), K)
    _, d2 = svm_predict(svm_train(K, -y, C), K)
    np.testing.assert_allclose(d1, -d2, atol=1e-6 * max(1, np.abs(d1).max()))


@FAST
@given(arrays(float, (5, 5), elements=st.floats(-3, 3)))
def test_post_processing_pipeline_is_psd(M):
    K = symmetrize(M).entries
    np.fill_diagonal(K, np.abs(np.diag(K)) + 1)
    out = psd_clip(unit_diag_normalize(K)).entries
    assert np.linalg.eigvalsh(out).min() >= -1e-9
    np.testing.assert_array_equal(out, out.T)


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10_000))
def test_local_kernel_psd_unit_diagonal(d, seed):
    X = np.random.default_rng(seed).uniform(-np.pi, np.pi, size=(6, d))
    K = local_kernel(X, KernelConfig("local_rdm", rdm_metric="hs")).entries
    assert np.linalg.eigvalsh(K).min() >= -1e-9
    np.testing.assert_allclose(np.diag(K), 1, atol=1e-12)
