"""Invertible nonlinear dimensionality reduction via per-component regression.

The core transform rotates data into its principal axes and then replaces
every score by the part of it that cannot be predicted from the
higher-variance scores, using kernel ridge regression.  The result keeps the
conveniences of PCA -- exact inversion, out-of-sample application, unit
Jacobian determinant -- while capturing curved structure.

Also included: a principal polynomial analysis baseline, synthetic curved
manifolds for benchmarking, evaluation protocols (reconstruction curves,
LDA on reconstructed data, linear retrieval from compressed features),
model persistence, and a command line front end.
"""

from .data import LabeledDataset, SplitSpec, center, load_csv, save_csv, split
from .evaluation import (
    LdaModel,
    ReconstructionCurve,
    classification_error,
    classification_protocol,
    fit_lda,
    fit_linear_retrieval,
    make_retrieval_task,
    reconstruction_curve,
    retrieval_mae,
    retrieval_protocol,
)
from .kernels import backend_name, kernel_dot, kernel_matrix
from .krr import KrrModel, cross_validate_krr, fit_krr
from .manifolds import (
    LatentGrid,
    ManifoldSpec,
    benchmark_manifold,
    generate_manifold,
    grid_points,
    mse_dr,
    mse_features,
)
from .model_io import load_model, save_model
from .pca import PcaModel, fit_pca
from .ppa import PpaModel, fit_ppa
from .reduction import DrrConfig, DrrModel, fit_drr

__version__ = "0.1.0"

__all__ = [
    "LabeledDataset",
    "SplitSpec",
    "center",
    "load_csv",
    "save_csv",
    "split",
    "PcaModel",
    "fit_pca",
    "KrrModel",
    "fit_krr",
    "cross_validate_krr",
    "kernel_matrix",
    "kernel_dot",
    "backend_name",
    "DrrConfig",
    "DrrModel",
    "fit_drr",
    "PpaModel",
    "fit_ppa",
    "ManifoldSpec",
    "LatentGrid",
    "generate_manifold",
    "grid_points",
    "mse_dr",
    "mse_features",
    "benchmark_manifold",
    "ReconstructionCurve",
    "reconstruction_curve",
    "LdaModel",
    "fit_lda",
    "classification_error",
    "fit_linear_retrieval",
    "retrieval_mae",
    "make_retrieval_task",
    "classification_protocol",
    "retrieval_protocol",
    "save_model",
    "load_model",
    "__version__",
]
