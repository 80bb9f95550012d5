"""scikit-learn style wrappers around the kernel, Nystrom, SVM and preprocessing code."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .data import seeded_permutation
from .featuremaps import FeatureMapSpec
from .kernels import KernelConfig, KernelFamily, compute_kernel, cross_kernel, nystrom_features
from .learn import _ovr_fit, _ovr_predict
from .simcore import hermitian_eig

__all__ = ["QuantumKernelTransformer", "PrecomputedSVC", "NystroemQuantum", "QuantumPreprocessor"]


class _KernelParams:
    """Shared hyperparameters; turns them into a :class:`KernelConfig`."""

    def _config(self) -> KernelConfig:
        metric = self.rdm_metric
        if metric is None and KernelFamily(self.family) is KernelFamily.LOCAL_RDM:
            metric = "hs"
        return KernelConfig(
            self.family,
            FeatureMapSpec(self.feature_map, self.depth, self.entanglement),
            metric,
            block_size=self.block_size,
        )


class QuantumKernelTransformer(_KernelParams, TransformerMixin, BaseEstimator):
    """Map samples to kernel rows against the training set.

    ``fit_transform(X)`` returns the full square construction for the chosen
    family (with its normalization and, for local kernels, PSD projection).
    ``transform(Z)`` returns cross similarities against the training rows:
    multi-scale values are scaled by ``sqrt(k(z, z) k(x, x))``, the other
    families use the raw aggregated similarity. Off the diagonal this matches
    the square kernel before any PSD projection.
    """

    def __init__(
        self,
        family="baseline",
        feature_map="zz_manual",
        depth=1,
        entanglement="linear",
        rdm_metric=None,
        block_size=64,
    ):
        self.family = family
        self.feature_map = feature_map
        self.depth = depth
        self.entanglement = entanglement
        self.rdm_metric = rdm_metric
        self.block_size = block_size

    def _self_sim(self, X):
        cfg = self.config_
        return np.array([cross_kernel(x[None, :], x[None, :], cfg)[0, 0] for x in X])

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        self.config_ = self._config()
        self.X_fit_ = X
        self.n_features_in_ = X.shape[1]
        if self.config_.family is KernelFamily.MULTISCALE:
            self.diag_fit_ = self._self_sim(X)
        return self

    def fit_transform(self, X, y=None):
        self.fit(X)
        return compute_kernel(self.X_fit_, self.config_).entries

    def transform(self, X):
        check_is_fitted(self, "X_fit_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        K = cross_kernel(X, self.X_fit_, self.config_)
        if self.config_.family is not KernelFamily.MULTISCALE:
            return K
        return K / np.sqrt(np.outer(self._self_sim(X), self.diag_fit_))


class PrecomputedSVC(ClassifierMixin, BaseEstimator):
    """One-vs-rest SMO classifier on precomputed kernels.

    ``fit`` takes the square training Gram matrix, ``predict`` and
    ``decision_function`` take kernel rows of shape ``(n_eval, n_train)``.
    """

    def __init__(self, C=1.0, tol=1e-3):
        self.C = C
        self.tol = tol

    def fit(self, K, y):
        K = check_array(K, dtype=float)
        y = np.asarray(y).ravel()
        if K.shape[0] != K.shape[1]:
            raise ValueError(f"training kernel must be square, got {K.shape}")
        if y.size != K.shape[0]:
            raise ValueError(f"{y.size} labels for a {K.shape[0]}x{K.shape[0]} kernel")
        self.classes_, self.models_ = _ovr_fit(K, y, self.C, np.arange(y.size), self.tol)
        self.n_features_in_ = K.shape[1]
        return self

    def _rows(self, K):
        check_is_fitted(self, "models_")
        K = check_array(K, dtype=float)
        if K.shape[1] != self.n_features_in_:
            raise ValueError(f"kernel rows have {K.shape[1]} columns, expected {self.n_features_in_}")
        return K

    def decision_function(self, K):
        K = self._rows(K)
        if len(self.models_) == 1:
            return self.models_[0].decision_function(K)
        return np.column_stack([m.decision_function(K) for m in self.models_])

    def predict(self, K):
        K = self._rows(K)
        return _ovr_predict(self.classes_, self.models_, K)


class NystroemQuantum(_KernelParams, TransformerMixin, BaseEstimator):
    """Explicit low-rank features from ``n_components`` seeded landmark rows.

    Landmarks are the first ``n_components`` entries of the seeded shuffle
    used for splits, so they are reproducible from ``random_state`` alone.
    """

    def __init__(
        self,
        n_components=50,
        family="baseline",
        feature_map="zz_manual",
        depth=1,
        entanglement="linear",
        rdm_metric=None,
        block_size=64,
        random_state=0,
        rcond=1e-10,
    ):
        self.n_components = n_components
        self.family = family
        self.feature_map = feature_map
        self.depth = depth
        self.entanglement = entanglement
        self.rdm_metric = rdm_metric
        self.block_size = block_size
        self.random_state = random_state
        self.rcond = rcond

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        n = X.shape[0]
        m = min(int(self.n_components), n)
        if m < 1:
            raise ValueError("n_components must be positive")
        self.config_ = self._config()
        self.landmark_indices_ = np.sort(seeded_permutation(n, int(self.random_state))[:m])
        self.landmarks_ = X[self.landmark_indices_]
        W = cross_kernel(self.landmarks_, self.landmarks_, self.config_)
        self.W_ = 0.5 * (W + W.T)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "landmarks_")
        X = check_array(X, dtype=float)
        C = cross_kernel(X, self.landmarks_, self.config_)
        return nystrom_features(C, self.W_, self.rcond)


def _col_stats(X):
    mean = X.mean(axis=0)
    std = (X - mean).std(axis=0, ddof=1)
    const = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
    return mean, np.where(const, np.inf, std)


class QuantumPreprocessor(TransformerMixin, BaseEstimator):
    """Standardize, reach ``target_d`` columns by PCA or pairwise products, standardize again.

    Statistics and PCA directions come from the data passed to ``fit``; on that
    data the output agrees with :func:`qkonc.data.preprocess`.
    """

    def __init__(self, target_d=4):
        self.target_d = target_d

    def fit(self, X, y=None):
        X = check_array(X, dtype=float, ensure_min_samples=2)
        d = int(self.target_d)
        if d < 1:
            raise ValueError("target_d must be >= 1")
        p = X.shape[1]
        self.n_features_in_ = p
        self.stats_in_ = _col_stats(X)
        Z = self._scale(X, self.stats_in_)
        self.components_ = None
        self.pairs_ = []
        self.stats_aug_ = None
        if p > d:
            self.center_ = Z.mean(axis=0)
            cov = (Z - self.center_).T @ (Z - self.center_) / (Z.shape[0] - 1)
            V = hermitian_eig(0.5 * (cov + cov.T)).eigenvectors[:, :d].real.copy()
            signs = np.sign(V[np.argmax(np.abs(V), axis=0), np.arange(d)])
            signs[signs == 0] = 1.0
            self.components_ = V * signs
        elif p < d:
            if d > p + p * (p - 1) // 2:
                raise ValueError(f"{p} features reach at most width {p + p * (p - 1) // 2} with pairwise products")
            self.pairs_ = [(a, b) for a in range(p) for b in range(a + 1, p)][: d - p]
            self.stats_aug_ = _col_stats(self._widen(Z))
        self.stats_out_ = _col_stats(self._middle(Z))
        return self

    @staticmethod
    def _scale(X, stats):
        mean, std = stats
        return (X - mean) / std

    def _widen(self, Z):
        return np.column_stack([Z] + [Z[:, a] * Z[:, b] for a, b in self.pairs_])

    def _middle(self, Z):
        if self.components_ is not None:
            return (Z - self.center_) @ self.components_
        if self.pairs_:
            return self._scale(self._widen(Z), self.stats_aug_)
        return Z

    def transform(self, X):
        check_is_fitted(self, "stats_out_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return self._scale(self._middle(self._scale(X, self.stats_in_)), self.stats_out_)
