"""Precomputed-kernel SVM (SMO), one-vs-rest wrapper and validation-selected ``C``."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "DEFAULT_C_GRID",
    "SvmModel",
    "SelectionResult",
    "svm_train",
    "svm_predict",
    "dual_objective",
    "ovr_train_predict",
    "select_and_evaluate",
]

logger = logging.getLogger(__name__)

DEFAULT_C_GRID = (0.1, 1.0, 10.0)
TAU = 1e-12


@dataclass
class SvmModel:
    """Binary SVM in dual form.

    ``dual_coef[i]`` holds ``alpha_i * y_i`` for every training sample, so the
    decision value of a kernel row ``k`` is ``k @ dual_coef + bias``.
    """

    dual_coef: np.ndarray
    bias: float
    support_indices: np.ndarray
    C: float
    converged: bool = True
    iterations: int = 0
    kkt_gap: float = 0.0

    @property
    def alpha(self) -> np.ndarray:
        return np.abs(self.dual_coef)

    def decision_function(self, K_eval) -> np.ndarray:
        K_eval = np.atleast_2d(np.asarray(K_eval, dtype=float))
        if K_eval.shape[1] != self.dual_coef.size:
            raise ValueError(
                f"kernel rows have {K_eval.shape[1]} columns, model was trained on {self.dual_coef.size}"
            )
        return K_eval @ self.dual_coef + self.bias


def _check_binary(y) -> np.ndarray:
    y = np.asarray(y, dtype=float).ravel()
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("binary labels must be -1 or +1")
    if np.unique(y).size < 2:
        raise ValueError("training labels contain a single class")
    return y


def svm_train(K_train, y, C: float, tol: float = 1e-3, max_iter: int | None = None) -> SvmModel:
    """Solve the C-SVM dual on a precomputed kernel with SMO.

    Working pairs follow the maximal-violating-pair rule. Iteration stops when
    the KKT gap ``max_{I_up} -y G - min_{I_low} -y G`` drops below ``tol`` or
    after ``max_iter`` pair updates (default ``200 * n``), in which case the
    returned model has ``converged=False``.
    """
    K = np.asarray(K_train, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError(f"K_train must be square, got shape {K.shape}")
    if np.max(np.abs(K - K.T)) > 1e-8 * max(1.0, np.max(np.abs(K))):
        raise ValueError("K_train must be symmetric")
    y = _check_binary(y)
    n = K.shape[0]
    if y.size != n:
        raise ValueError(f"{y.size} labels for {n} training rows")
    if not C > 0:
        raise ValueError("C must be positive")
    if max_iter is None:
        max_iter = 200 * n

    Q = (y[:, None] * y[None, :]) * K
    diag = np.diag(K)
    alpha = np.zeros(n)
    grad = -np.ones(n)
    pos = y > 0
    it = 0
    gap = np.inf
    converged = False
    while True:
        at_upper = alpha >= C
        at_lower = alpha <= 0
        up = np.where(pos, ~at_upper, ~at_lower)
        low = np.where(pos, ~at_lower, ~at_upper)
        score = -y * grad
        i = int(np.argmax(np.where(up, score, -np.inf)))
        j = int(np.argmin(np.where(low, score, np.inf)))
        gap = score[i] - score[j]
        if gap < tol:
            converged = True
            break
        if it >= max_iter:
            break
        it += 1

        ai, aj = alpha[i], alpha[j]
        quad = diag[i] + diag[j] - 2.0 * K[i, j]
        if quad <= 0:
            quad = TAU
        if y[i] != y[j]:
            delta = (-grad[i] - grad[j]) / quad
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            elif ni < 0:
                ni, nj = 0.0, -diff
            if diff > 0:
                if ni > C:
                    ni, nj = C, C - diff
            elif nj > C:
                nj, ni = C, C + diff
        else:
            delta = (grad[i] - grad[j]) / quad
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > C:
                if ni > C:
                    ni, nj = C, total - C
            elif nj < 0:
                nj, ni = 0.0, total
            if total > C:
                if nj > C:
                    nj, ni = C, total - C
            elif ni < 0:
                ni, nj = 0.0, total
        alpha[i], alpha[j] = ni, nj
        grad += Q[:, i] * (ni - ai) + Q[:, j] * (nj - aj)

    if not converged:
        logger.warning("SMO hit the iteration cap (%d) with KKT gap %.3e", max_iter, gap)

    # bias from free support vectors, else the midpoint of the feasible interval
    yg = y * grad
    free = (alpha > 0) & (alpha < C)
    if np.any(free):
        rho = float(np.mean(yg[free]))
    else:
        upper_bound = np.where((alpha >= C) & ~pos | (alpha <= 0) & pos, yg, np.inf).min()
        lower_bound = np.where((alpha >= C) & pos | (alpha <= 0) & ~pos, yg, -np.inf).max()
        if not np.isfinite(upper_bound):
            upper_bound = lower_bound
        if not np.isfinite(lower_bound):
            lower_bound = upper_bound
        rho = float(0.5 * (upper_bound + lower_bound))
    return SvmModel(
        dual_coef=alpha * y,
        bias=-rho,
        support_indices=np.flatnonzero(alpha > 0),
        C=float(C),
        converged=converged,
        iterations=it,
        kkt_gap=float(gap),
    )


def svm_predict(model: SvmModel, K_eval) -> tuple[np.ndarray, np.ndarray]:
    """Labels in ``{-1, +1}`` (exact zeros map to ``+1``) and raw decision values."""
    dec = model.decision_function(K_eval)
    return np.where(dec >= 0, 1, -1), dec


def dual_objective(alpha_y, K, y) -> float:
    """``sum(alpha) - 0.5 alpha^T Q alpha`` for ``alpha_y = alpha * y``."""
    alpha_y = np.asarray(alpha_y, dtype=float)
    K = np.asarray(K, dtype=float)
    alpha = alpha_y * np.asarray(y, dtype=float)
    return float(alpha.sum() - 0.5 * alpha_y @ K @ alpha_y)


def _as_index(idx) -> np.ndarray:
    return np.asarray(idx, dtype=int).ravel()


def _ovr_fit(K, y, C, train, tol=1e-3):
    classes = np.unique(y)
    ytr = y[train]
    missing = [int(c) for c in classes if not np.any(ytr == c)]
    if missing:
        raise ValueError(f"classes {missing} are absent from the training split")
    Ktr = K[np.ix_(train, train)]
    if classes.size == 2:
        model = svm_train(Ktr, np.where(ytr == classes[1], 1.0, -1.0), C, tol)
        return classes, [model]
    models = [svm_train(Ktr, np.where(ytr == c, 1.0, -1.0), C, tol) for c in classes]
    return classes, models


def _ovr_predict(classes, models, Kev) -> np.ndarray:
    if len(models) == 1:
        labels, _ = svm_predict(models[0], Kev)
        return np.where(labels > 0, classes[1], classes[0])
    scores = np.column_stack([m.decision_function(Kev) for m in models])
    # argmax keeps the first (smallest) class id on ties
    return classes[np.argmax(scores, axis=1)]


def ovr_train_predict(K, y, C: float, train, evaluate) -> np.ndarray:
    """Train one-vs-rest SVMs on ``train`` and predict class ids for ``evaluate``.

    Two classes reduce to a single binary model with the larger id as ``+1``.
    """
    K = np.asarray(K, dtype=float)
    y = np.asarray(y).ravel()
    train, evaluate = _as_index(train), _as_index(evaluate)
    classes, models = _ovr_fit(K, y, C, train)
    return _ovr_predict(classes, models, K[np.ix_(evaluate, train)])


@dataclass
class SelectionResult:
    best_C: float
    val_accuracy: float
    test_accuracy: float
    per_C_val_accuracies: dict = field(default_factory=dict)
    grid: tuple = DEFAULT_C_GRID


def select_and_evaluate(K, y, splits, grid: Sequence[float] = DEFAULT_C_GRID) -> SelectionResult:
    """Pick ``C`` by validation accuracy (first in grid on ties), then score the test split once."""
    K = np.asarray(K, dtype=float)
    y = np.asarray(y).ravel()
    grid = tuple(float(c) for c in grid)
    if not grid:
        raise ValueError("C grid must be nonempty")
    train, val, test = (_as_index(getattr(splits, s)) for s in ("train", "val", "test"))
    for name, idx in (("train", train), ("val", val), ("test", test)):
        if idx.size == 0:
            raise ValueError(f"{name} split is empty")

    per_c = {}
    best = None
    for C in grid:
        classes, models = _ovr_fit(K, y, C, train)
        pred = _ovr_predict(classes, models, K[np.ix_(val, train)])
        acc = float(np.mean(pred == y[val]))
        per_c[C] = acc
        if best is None or acc > best[1]:
            best = (C, acc, classes, models)

    C, val_acc, classes, models = best
    test_pred = _ovr_predict(classes, models, K[np.ix_(test, train)])
    return SelectionResult(
        best_C=C,
        val_accuracy=val_acc,
        test_accuracy=float(np.mean(test_pred == y[test])),
        per_C_val_accuracies=per_c,
        grid=grid,
    )
