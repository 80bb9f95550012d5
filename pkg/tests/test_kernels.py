import json

import numpy as np
import pytest

import oracles
from qkonc.featuremaps import FeatureMapSpec, encode, encode_batch
from qkonc.kernels import (
    GramMatrix,
    KernelConfig,
    KernelFamily,
    PatchSet,
    RdmMetric,
    ScaleSpec,
    _multiscale_raw,
    baseline_kernel,
    baseline_kernel_from_features,
    center,
    compute_kernel,
    cross_kernel,
    default_patches,
    default_scales,
    load_gram,
    local_kernel,
    local_patch_grams,
    multiscale_kernel,
    nystrom_features,
    psd_clip,
    save_gram,
    symmetrize,
    unit_diag_normalize,
)
from qkonc.simcore import Statevector, hermitian_eig

FM = FeatureMapSpec()


def rand_X(n, d, seed=0):
    return np.random.default_rng(seed).uniform(-np.pi, np.pi, size=(n, d))


def full(d):
    return PatchSet((tuple(range(d)),))


def overlap_oracle(X, family="zz_manual"):
    S = np.array([oracles.dense_encode(family, x) for x in X])
    return np.abs(S.conj() @ S.T) ** 2


# --- patch and scale specs ---------------------------------------------------


def test_default_patches_even():
    ps = default_patches(4)
    assert ps.patches == ((0, 1), (2, 3))
    assert ps.weights == (0.5, 0.5)


def test_default_patches_two():
    ps = default_patches(2)
    assert ps.patches == ((0, 1),) and ps.weights == (1.0,)


def test_default_patches_odd_adds_singleton():
    ps = default_patches(5)
    assert ps.patches == ((0, 1), (2, 3), (4,))
    np.testing.assert_allclose(ps.weights, [1 / 3] * 3)


def test_default_patches_too_small():
    with pytest.raises(ValueError):
        default_patches(1)


def test_default_scales_four():
    ss = default_scales(4)
    assert ss.scales == (((0, 1), (2, 3)), ((0, 1, 2, 3),))
    assert ss.alphas == (0.5, 0.5)


def test_alphas_renormalized():
    assert default_scales(4, alphas=(2, 2)).alphas == (0.5, 0.5)


def test_patch_weights_renormalized():
    ps = PatchSet(((0,), (1,)), (1.0, 3.0))
    assert ps.weights == (0.25, 0.75)


@pytest.mark.parametrize("patches", [((),), ((0, 0),)])
def test_invalid_patch(patches):
    with pytest.raises(ValueError):
        PatchSet(patches)


def test_patch_out_of_range_for_d():
    cfg = KernelConfig("local_subcircuit", FM, patch_set=PatchSet(((0, 5),)))
    with pytest.raises(ValueError):
        local_kernel(rand_X(3, 4), cfg)


def test_negative_weights_rejected():
    with pytest.raises(ValueError):
        PatchSet(((0,), (1,)), (1.0, -1.0))


def test_rdm_metric_iff_local_rdm():
    with pytest.raises(ValueError):
        KernelConfig("local_rdm")
    with pytest.raises(ValueError):
        KernelConfig("baseline", rdm_metric="hs")


# --- post-processing ---------------------------------------------------------


def test_psd_clip_example():
    out = psd_clip(np.array([[1.0, 2.0], [2.0, 1.0]]))
    np.testing.assert_allclose(out.entries, 1.5 * np.ones((2, 2)), atol=1e-10)
    np.testing.assert_allclose(unit_diag_normalize(out).entries, np.ones((2, 2)), atol=1e-12)


def test_center_annihilates_constants():
    np.testing.assert_allclose(center(np.ones((5, 5))).entries, 0, atol=1e-15)


def test_unit_diag_normalize_diagonal():
    np.testing.assert_array_equal(unit_diag_normalize(np.diag([4.0, 9.0])).entries, np.eye(2))


def test_unit_diag_normalize_reports_index():
    with pytest.raises(ValueError, match="2"):
        unit_diag_normalize(np.diag([1.0, 2.0, 0.0]))


def test_symmetrize():
    a = np.array([[1.0, 2.0], [0.0, 1.0]])
    np.testing.assert_array_equal(symmetrize(a).entries, [[1, 1], [1, 1]])


def test_postprocessing_recorded_in_meta():
    g = psd_clip(symmetrize(np.eye(3)))
    assert g.meta["postprocessing"] == ["symmetrize", "psd_clip"]


def test_psd_clip_requires_symmetric():
    with pytest.raises(ValueError):
        psd_clip(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_psd_clip_min_eigenvalue():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(12, 12))
    out = psd_clip(a + a.T).entries
    assert hermitian_eig(out).eigenvalues[-1] >= -1e-9


# --- baseline ------------------------------------------------------------------


def test_baseline_identical_states():
    s = encode(FM, [0.3, 0.4])
    np.testing.assert_allclose(baseline_kernel([s] * 3).entries, np.ones((3, 3)), atol=1e-15)


def test_baseline_orthogonal_states():
    K = baseline_kernel([Statevector([1, 0]), Statevector([0, 1])]).entries
    np.testing.assert_array_equal(K, np.eye(2))


def test_baseline_one_qubit_closed_form():
    X = np.array([[0.0], [np.pi / 2], [np.pi]])
    K = baseline_kernel_from_features(X, FM).entries
    assert abs(K[0, 2]) < 1e-15
    assert abs(K[0, 1] - 0.5) < 1e-15


def test_baseline_rejects_empty_and_mixed():
    with pytest.raises(ValueError):
        baseline_kernel([])
    with pytest.raises(ValueError):
        baseline_kernel([Statevector([1, 0]), Statevector([1, 0, 0, 0])])


@pytest.mark.parametrize("family", ["zz_manual", "zz_manual_canonical", "zz_qiskit"])
def test_baseline_matches_dense_oracle(family):
    X = rand_X(6, 3, 1)
    K = compute_kernel(X, KernelConfig("baseline", FeatureMapSpec(family))).entries
    ref = overlap_oracle(X, family)
    np.fill_diagonal(ref, 1)
    np.testing.assert_allclose(K, ref, atol=1e-13)


def test_baseline_block_size_invariance():
    X = rand_X(9, 5, 2)
    a = baseline_kernel_from_features(X, FM, block_size=2).entries
    b = baseline_kernel_from_features(X, FM, block_size=64).entries
    np.testing.assert_allclose(a, b, atol=1e-14)


def test_baseline_streaming_regime():
    X = rand_X(5, 16, 3)
    K = baseline_kernel_from_features(X, FM, block_size=2).entries
    S = encode_batch(FM, X)
    ref = np.abs(S.conj() @ S.T) ** 2
    np.fill_diagonal(ref, 1)
    np.testing.assert_allclose(K, ref, atol=1e-12)


def test_baseline_meta():
    g = compute_kernel(rand_X(3, 2), KernelConfig())
    assert g.meta["family"] == "baseline"
    assert g.meta["feature_map"]["family"] == "zz_manual"


# --- local kernels -------------------------------------------------------------


@pytest.mark.parametrize("d", [2, 4, 6])
def test_local_rdm_full_patch_equals_baseline(d):
    X = rand_X(10, d, d)
    base = compute_kernel(X, KernelConfig()).entries
    for metric in ("hs", "fidelity"):
        cfg = KernelConfig("local_rdm", FM, metric, patch_set=full(d))
        np.testing.assert_allclose(local_kernel(X, cfg).entries, base, atol=1e-10)


def test_local_rdm_full_patch_above_dense_limit():
    X = rand_X(6, 8, 4)
    cfg = KernelConfig("local_rdm", FM, "hs", patch_set=full(8))
    np.testing.assert_allclose(local_kernel(X, cfg).entries, compute_kernel(X, KernelConfig()).entries, atol=1e-10)


def test_subcircuit_full_patch_equals_baseline_bitwise():
    X = rand_X(8, 4, 5)
    cfg = KernelConfig("local_subcircuit", FM, patch_set=full(4))
    got = local_kernel(X, cfg, project_psd=False).entries
    assert np.array_equal(got, compute_kernel(X, KernelConfig()).entries)


def test_subcircuit_product_structured_pair():
    x = np.array([0.4, -0.9, 1.1, 0.2])
    z = np.array([0.4, -0.9, -0.6, 2.0])
    cfg = KernelConfig("local_subcircuit", FM)
    K = local_kernel(np.stack([x, z]), cfg, project_psd=False).entries
    kappa = abs(np.vdot(oracles.dense_encode("zz_manual", x[2:]), oracles.dense_encode("zz_manual", z[2:]))) ** 2
    assert abs(K[0, 1] - (1 + kappa) / 2) < 1e-14


def test_local_rdm_patch_grams_match_oracle():
    X = rand_X(4, 4, 6)
    cfg = KernelConfig("local_rdm", FM, "fidelity")
    grams = local_patch_grams(X, cfg)
    S = [oracles.dense_encode("zz_manual", x) for x in X]
    for G, p in zip(grams, ((0, 1), (2, 3))):
        rhos = [oracles.dense_partial_trace(s, p, 4) for s in S]
        for i in range(4):
            assert G[i, i] == 1.0
            for j in range(4):
                if i != j:
                    # sqrt of near-zero eigenvalues turns 1e-16 noise into ~1e-8 on both sides
                    assert abs(G[i, j] - oracles.fidelity_sq(rhos[i], rhos[j])) < 1e-7


def test_local_rdm_hs_patch_gram_off_diagonal_is_trace_product():
    X = rand_X(4, 4, 7)
    G = local_patch_grams(X, KernelConfig("local_rdm", FM, "hs"))[1]
    S = [oracles.dense_encode("zz_manual", x) for x in X]
    rhos = [oracles.dense_partial_trace(s, (2, 3), 4) for s in S]
    for i in range(4):
        for j in range(i + 1, 4):
            assert abs(G[i, j] - np.trace(rhos[i] @ rhos[j]).real) < 1e-14


@pytest.mark.parametrize("family,metric", [("local_subcircuit", None), ("local_rdm", "hs"), ("local_rdm", "fidelity")])
def test_local_aggregation_is_linear_in_weights(family, metric):
    X = rand_X(7, 6, 8)
    ps = PatchSet(((0, 1), (2, 3, 4), (5,)), (0.2, 0.5, 0.3))
    cfg = KernelConfig(family, FM, metric, patch_set=ps)
    grams = local_patch_grams(X, cfg)
    expected = sum(w * G for w, G in zip(ps.weights, grams))
    got = local_kernel(X, cfg, project_psd=False).entries
    np.testing.assert_allclose(got, 0.5 * (expected + expected.T), atol=1e-12)


@pytest.mark.parametrize("family,metric", [("local_subcircuit", None), ("local_rdm", "hs"), ("local_rdm", "fidelity")])
def test_local_kernel_invariants(family, metric):
    X = rand_X(15, 6, 9)
    K = local_kernel(X, KernelConfig(family, FeatureMapSpec("zz_qiskit"), metric)).entries
    assert np.max(np.abs(K - K.T)) <= 1e-12
    np.testing.assert_allclose(np.diag(K), 1, atol=1e-12)
    assert K.min() >= -1e-9 and K.max() <= 1 + 1e-9
    assert hermitian_eig(K).eigenvalues[-1] >= -1e-9


def test_local_kernel_wrong_family():
    with pytest.raises(ValueError):
        local_kernel(rand_X(3, 2), KernelConfig())


# --- multi-scale ---------------------------------------------------------------


@pytest.mark.parametrize("d", [2, 4, 6])
def test_multiscale_single_full_scale_equals_baseline(d):
    X = rand_X(10, d, 10 + d)
    cfg = KernelConfig("multiscale", FM, scale_spec=ScaleSpec(((tuple(range(d)),),), (1.0,)))
    np.testing.assert_allclose(multiscale_kernel(X, cfg).entries, compute_kernel(X, KernelConfig()).entries, atol=1e-10)


def test_multiscale_default_two_qubits_equals_baseline():
    X = rand_X(8, 2, 11)
    np.testing.assert_allclose(
        multiscale_kernel(X, KernelConfig("multiscale")).entries, compute_kernel(X, KernelConfig()).entries, atol=1e-10
    )


def test_multiscale_pairs_only_is_normalized_mean_hs():
    X = rand_X(6, 4, 12)
    ss = ScaleSpec((((0, 1), (2, 3)), ((0, 1, 2, 3),)), (1.0, 0.0))
    K = multiscale_kernel(X, KernelConfig("multiscale", FM, scale_spec=ss)).entries
    S = [oracles.dense_encode("zz_manual", x) for x in X]
    raw = np.zeros((6, 6))
    for p in ((0, 1), (2, 3)):
        R = [oracles.dense_partial_trace(s, p, 4) for s in S]
        raw += np.array([[np.trace(a @ b).real for b in R] for a in R]) / 2
    dn = np.sqrt(np.diag(raw))
    np.testing.assert_allclose(K, raw / np.outer(dn, dn), atol=1e-12)


def test_multiscale_pairs_only_differs_from_pinned_local_kernel():
    # local RDM patches pin their diagonal to 1, multi-scale divides by the raw purity
    X = rand_X(6, 4, 13)
    ss = ScaleSpec((((0, 1), (2, 3)), ((0, 1, 2, 3),)), (1.0, 0.0))
    ms = multiscale_kernel(X, KernelConfig("multiscale", FM, scale_spec=ss)).entries
    loc = local_kernel(X, KernelConfig("local_rdm", FM, "hs"), project_psd=False).entries
    assert np.max(np.abs(ms - loc)) > 1e-3


def test_multiscale_pure_patches_matches_local_hs():
    # with all-zero entangling phase (zz_manual, no CZ effect) patches factorize and purities equal 1
    X = rand_X(6, 4, 14)
    X[:, 1] = 0.0
    X[:, 3] = 0.0
    ss = ScaleSpec((((0, 1), (2, 3)), ((0, 1, 2, 3),)), (1.0, 0.0))
    ms = multiscale_kernel(X, KernelConfig("multiscale", FM, scale_spec=ss)).entries
    loc = local_kernel(X, KernelConfig("local_rdm", FM, "hs"), project_psd=False).entries
    np.testing.assert_allclose(ms, loc, atol=1e-10)


def test_multiscale_one_hot_alpha_is_single_scale():
    X = rand_X(5, 4, 15)
    pairs = ((0, 1), (2, 3))
    both = KernelConfig("multiscale", FM, scale_spec=ScaleSpec((pairs, ((0, 1, 2, 3),)), (0.0, 1.0)))
    only = KernelConfig("multiscale", FM, scale_spec=ScaleSpec((((0, 1, 2, 3),),), (1.0,)))
    np.testing.assert_allclose(_multiscale_raw(X, both), _multiscale_raw(X, only), atol=1e-12)


def test_multiscale_is_symmetric_unit_diagonal():
    K = multiscale_kernel(rand_X(12, 6, 16), KernelConfig("multiscale")).entries
    assert np.array_equal(K, K.T)
    np.testing.assert_allclose(np.diag(K), 1, atol=1e-12)
    assert "psd_clip" not in multiscale_kernel(rand_X(3, 4), KernelConfig("multiscale")).meta["postprocessing"]


def test_multiscale_invalid_scale():
    with pytest.raises(ValueError):
        ScaleSpec((), ())


# --- cross kernel --------------------------------------------------------------


def test_cross_kernel_self_matches_baseline():
    X = rand_X(7, 4, 17)
    C = cross_kernel(X, X, KernelConfig())
    np.testing.assert_allclose(C, compute_kernel(X, KernelConfig()).entries, atol=1e-12)


def test_cross_kernel_single_landmark():
    X = rand_X(5, 3, 18)
    C = cross_kernel(X, X[2:3], KernelConfig())
    assert C.shape == (5, 1)
    assert abs(C[2, 0] - 1) < 1e-14


@pytest.mark.parametrize(
    "cfg",
    [
        KernelConfig(),
        KernelConfig("local_subcircuit"),
        KernelConfig("local_rdm", rdm_metric="hs"),
        KernelConfig("local_rdm", rdm_metric="fidelity"),
        KernelConfig("multiscale"),
    ],
    ids=lambda c: c.family.value + (f"-{c.rdm_metric.value}" if c.rdm_metric else ""),
)
def test_cross_kernel_chunk_invariance(cfg):
    X = rand_X(9, 4, 19)
    Z = rand_X(4, 4, 20)
    a = cross_kernel(X, Z, cfg, chunk_size=1)
    b = cross_kernel(X, Z, cfg, chunk_size=9)
    assert np.array_equal(a, b)


def test_cross_kernel_local_rdm_off_diagonal_matches_square():
    X = rand_X(6, 4, 21)
    cfg = KernelConfig("local_rdm", FM, "hs")
    C = cross_kernel(X, X, cfg)
    K = local_kernel(X, cfg, project_psd=False).entries
    off = ~np.eye(6, dtype=bool)
    np.testing.assert_allclose(C[off], K[off], atol=1e-12)


def test_cross_kernel_empty_landmarks():
    with pytest.raises(ValueError):
        cross_kernel(rand_X(3, 2), np.zeros((0, 2)), KernelConfig())


# --- Nystrom -------------------------------------------------------------------


def test_nystrom_identity_landmarks():
    C = np.random.default_rng(0).normal(size=(5, 3))
    np.testing.assert_allclose(nystrom_features(C, np.eye(3)), C, atol=1e-14)


def test_nystrom_full_landmarks_reconstruct():
    X = rand_X(20, 4, 22)
    K = cross_kernel(X, X, KernelConfig())
    P = nystrom_features(K, K)
    np.testing.assert_allclose(P @ P.T, K, atol=1e-8)


def test_nystrom_duplicate_landmark():
    X = rand_X(10, 3, 23)
    Z = np.vstack([X[:3], X[:1]])
    C = cross_kernel(X, Z, KernelConfig())
    W = cross_kernel(Z, Z, KernelConfig())
    P = nystrom_features(C, 0.5 * (W + W.T))
    R = P @ P.T
    assert np.max(np.abs(R - R.T)) < 1e-12
    assert hermitian_eig(0.5 * (R + R.T)).eigenvalues[-1] > -1e-9
    np.testing.assert_allclose(R, C @ np.linalg.pinv(W, rcond=1e-10, hermitian=True) @ C.T, atol=1e-8)


def test_nystrom_errors():
    with pytest.raises(ValueError):
        nystrom_features(np.ones((2, 2)), np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        nystrom_features(np.ones((2, 2)), np.zeros((2, 2)))


# --- persistence ---------------------------------------------------------------


def test_save_load_round_trip(tmp_path):
    g = compute_kernel(rand_X(6, 4, 24), KernelConfig("multiscale"))
    header, binfile = save_gram(g, tmp_path / "k", extra={"labels": [0, 1, 0, 1, 0, 1]})
    assert binfile.stat().st_size == 6 * 6 * 8
    raw = np.frombuffer(binfile.read_bytes(), dtype="<f8").reshape(6, 6)
    assert np.array_equal(raw, g.entries)
    meta = json.loads(header.read_text())
    assert meta["n"] == 6 and meta["family"] == "multiscale" and meta["byte_order"] == "little"
    back = load_gram(tmp_path / "k.bin")
    assert np.array_equal(back.entries, g.entries)
    assert back.meta["labels"] == [0, 1, 0, 1, 0, 1]
    assert back.meta["postprocessing"] == g.meta["postprocessing"]


def test_load_detects_truncated_binary(tmp_path):
    header, binfile = save_gram(GramMatrix(np.eye(3)), tmp_path / "k")
    binfile.write_bytes(binfile.read_bytes()[:-8])
    with pytest.raises(ValueError):
        load_gram(header)


def test_kernel_family_enum_values():
    assert {f.value for f in KernelFamily} == {"baseline", "local_subcircuit", "local_rdm", "multiscale"}
    assert {m.value for m in RdmMetric} == {"fidelity", "hs"}
