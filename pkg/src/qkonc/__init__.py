"""Fidelity quantum kernels with patch-local and multi-scale variants, simulated exactly.

Subpackages and modules:

* :mod:`qkonc.simcore`: statevectors, reduced states, Jacobi eigensolver, Uhlmann fidelity
* :mod:`qkonc.featuremaps`: ZZ-type encoding circuits
* :mod:`qkonc.kernels`: baseline, local and multi-scale Gram matrices, Nystrom features
* :mod:`qkonc.diagnostics`: concentration, effective rank, alignment
* :mod:`qkonc.learn`: SMO SVM on precomputed kernels and C selection
* :mod:`qkonc.data`: CSV loading, preprocessing, seeded splits
* :mod:`qkonc.estimators`: scikit-learn compatible wrappers
* :mod:`qkonc.bench`: sweep runner and command-line interface
"""

from .data import Dataset, SplitIndices, load_csv, make_splits, make_synthetic, preprocess
from .diagnostics import DiagnosticsReport, centered_alignment, diagnose, effective_rank, offdiag_percentiles
from .estimators import NystroemQuantum, PrecomputedSVC, QuantumKernelTransformer, QuantumPreprocessor
from .featuremaps import Entanglement, FeatureMapFamily, FeatureMapSpec
from .kernels import (
    GramMatrix,
    KernelConfig,
    KernelFamily,
    PatchSet,
    RdmMetric,
    ScaleSpec,
    compute_kernel,
    cross_kernel,
    load_gram,
    nystrom_features,
    psd_clip,
    save_gram,
)
from .learn import SelectionResult, SvmModel, select_and_evaluate, svm_predict, svm_train

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "DiagnosticsReport",
    "Entanglement",
    "FeatureMapFamily",
    "FeatureMapSpec",
    "GramMatrix",
    "KernelConfig",
    "KernelFamily",
    "NystroemQuantum",
    "PatchSet",
    "PrecomputedSVC",
    "QuantumKernelTransformer",
    "QuantumPreprocessor",
    "RdmMetric",
    "ScaleSpec",
    "SelectionResult",
    "SplitIndices",
    "SvmModel",
    "centered_alignment",
    "compute_kernel",
    "cross_kernel",
    "diagnose",
    "effective_rank",
    "load_csv",
    "load_gram",
    "make_splits",
    "make_synthetic",
    "nystrom_features",
    "offdiag_percentiles",
    "preprocess",
    "psd_clip",
    "save_gram",
    "select_and_evaluate",
    "svm_predict",
    "svm_train",
]
