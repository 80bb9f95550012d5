import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from qkonc import (
    NystroemQuantum,
    PrecomputedSVC,
    QuantumKernelTransformer,
    QuantumPreprocessor,
)
from qkonc.data import make_synthetic, preprocess
from qkonc.kernels import KernelConfig, KernelFamily, compute_kernel, cross_kernel, local_kernel, psd_clip
from qkonc.learn import ovr_train_predict

RNG = np.random.default_rng(11)
X = RNG.uniform(-1, 1, size=(14, 4))
Z = RNG.uniform(-1, 1, size=(5, 4))


@pytest.mark.parametrize("est", [QuantumKernelTransformer(), PrecomputedSVC(), NystroemQuantum(), QuantumPreprocessor()])
def test_params_and_clone(est):
    params = est.get_params()
    twin = clone(est)
    assert twin.get_params() == params and twin is not est
    key = next(iter(params))
    est.set_params(**{key: params[key]})


def test_not_fitted_errors():
    for est in (QuantumKernelTransformer(), NystroemQuantum(), QuantumPreprocessor()):
        with pytest.raises(NotFittedError):
            est.transform(X)
    with pytest.raises(NotFittedError):
        PrecomputedSVC().predict(np.eye(3))


@pytest.mark.parametrize("family", ["baseline", "local_rdm", "local_subcircuit", "multiscale"])
def test_transformer_matches_functional_api(family):
    t = QuantumKernelTransformer(family=family)
    cfg = KernelConfig(family, rdm_metric="hs" if family == "local_rdm" else None)
    np.testing.assert_array_equal(t.fit_transform(X), compute_kernel(X, cfg).entries)
    assert t.transform(Z).shape == (5, 14)


def test_transformer_rows_on_training_data():
    # off-diagonal cross rows equal the square kernel before PSD projection
    t = QuantumKernelTransformer(family="local_rdm").fit(X)
    pre = local_kernel(X, KernelConfig(KernelFamily.LOCAL_RDM, rdm_metric="hs"), project_psd=False).entries
    off = ~np.eye(14, dtype=bool)
    np.testing.assert_allclose(t.transform(X)[off], pre[off], atol=1e-12)
    ms = QuantumKernelTransformer(family="multiscale").fit(X)
    np.testing.assert_allclose(ms.transform(X), ms.fit_transform(X), atol=1e-12)
    base = QuantumKernelTransformer().fit(X)
    np.testing.assert_allclose(base.transform(Z), cross_kernel(Z, X, KernelConfig()), atol=0)


def test_transformer_feature_count_checked():
    t = QuantumKernelTransformer().fit(X)
    with pytest.raises(ValueError):
        t.transform(np.zeros((2, 3)))


def test_svc_matches_ovr():
    ds = make_synthetic("gaussian_blobs", 30, noise=0.5, seed=3)
    K = compute_kernel(preprocess(ds.features, 4), KernelConfig()).entries
    train, ev = np.arange(20), np.arange(20, 30)
    clf = PrecomputedSVC(C=1.0).fit(K[np.ix_(train, train)], ds.labels[train])
    expected = ovr_train_predict(K, ds.labels, 1.0, train, ev)
    assert np.array_equal(clf.predict(K[np.ix_(ev, train)]), expected)
    assert clf.decision_function(K[np.ix_(ev, train)]).shape == (10,)
    assert 0 <= clf.score(K[np.ix_(ev, train)], ds.labels[ev]) <= 1


def test_svc_multiclass_shapes_and_checks():
    y = np.repeat([0, 1, 2], 4)
    K = (y[:, None] == y[None, :]).astype(float) + 0.1
    clf = PrecomputedSVC().fit(K, y)
    assert clf.decision_function(K).shape == (12, 3)
    assert np.array_equal(clf.predict(K), y)
    with pytest.raises(ValueError):
        clf.predict(np.ones((2, 5)))
    with pytest.raises(ValueError):
        PrecomputedSVC().fit(np.ones((3, 4)), [0, 1, 0])


def test_nystroem_full_landmarks_reproduce_kernel():
    ny = NystroemQuantum(n_components=14).fit(X)
    Phi = ny.transform(X)
    K = psd_clip(cross_kernel(X, X, KernelConfig())).entries
    np.testing.assert_allclose(Phi @ Phi.T, K, atol=1e-8)
    assert sorted(ny.landmark_indices_) == list(range(14))


def test_nystroem_landmarks_seeded():
    a = NystroemQuantum(n_components=5, random_state=2).fit(X).landmark_indices_
    b = NystroemQuantum(n_components=5, random_state=2).fit(X).landmark_indices_
    assert np.array_equal(a, b) and len(a) == 5


@pytest.mark.parametrize("p,d", [(6, 4), (3, 5), (4, 4)])
def test_preprocessor_matches_functional(p, d):
    data = np.random.default_rng(p + d).normal(2, 3, size=(25, p))
    out = QuantumPreprocessor(target_d=d).fit_transform(data)
    np.testing.assert_allclose(out, preprocess(data, d), atol=1e-10)


def test_preprocessor_rejects_capacity():
    with pytest.raises(ValueError):
        QuantumPreprocessor(target_d=4).fit(np.random.default_rng(0).normal(size=(5, 2)))


def test_pipeline_end_to_end():
    ds = make_synthetic("two_moons_like", 40, seed=0)
    pipe = make_pipeline(QuantumPreprocessor(4), QuantumKernelTransformer(family="local_rdm"))
    K = pipe.fit_transform(ds.features)
    assert K.shape == (40, 40)
    np.testing.assert_allclose(np.diag(K), 1, atol=1e-12)
    assert pipe.transform(ds.features[:3]).shape == (3, 40)
