"""Evaluation protocols for fitted reductions.

Three downstream views of a model: reconstruction curves (error of the
truncated round trip at every width k), linear discriminant classification
on reconstructed data, and multi-output linear retrieval from compressed
features.  Every error here averages over all matrix entries, so values
are comparable across widths and datasets.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .data import LabeledDataset, SplitSpec, as_matrix, split
from .pca import fit_pca

# Errors below this fraction of the data scale count as exact, which keeps
# relative curves at 100% when both methods have hit rounding level.
RELATIVE_FLOOR = 1e-9


@dataclass
class ReconstructionCurve:
    """Per-width truncation errors, optionally relative to a reference.

    Relative columns are percentages (reference = 100); they exist only
    when a reference curve was supplied at construction.
    """

    method: str
    ks: np.ndarray
    mae: np.ndarray
    mse: np.ndarray
    relative_mae: np.ndarray | None = None
    relative_mse: np.ndarray | None = None


def _relative_percent(values, reference, floor):
    both_exact = (values <= floor) & (reference <= floor)
    with np.errstate(divide="ignore", invalid="ignore"):
        # divide first so that values == reference lands on exactly 100.0
        ratio = values / reference * 100.0
    return np.where(both_exact, 100.0, ratio)


def reconstruction_curve(model, x, method="model", reference=None) -> ReconstructionCurve:
    """Truncation error at every k = 1..d, as MAE and MSE over entries.

    Passing the PCA curve on the same data as reference adds relative
    columns; at widths where both errors sit below the numeric floor the
    ratio is pinned to 100 instead of amplifying rounding noise.
    """
    x = as_matrix(x, "x")
    d = model.d
    ks = np.arange(1, d + 1)
    mae = np.empty(d)
    mse = np.empty(d)
    for k in ks:
        err = model.reconstruct(x, int(k)) - x
        mae[k - 1] = np.mean(np.abs(err))
        mse[k - 1] = np.mean(err * err)
    curve = ReconstructionCurve(method, ks, mae, mse)
    if reference is not None:
        if reference.ks.shape != ks.shape:
            raise ValueError("reference curve has a different number of widths")
        floor = RELATIVE_FLOOR * max(1.0, float(np.mean(np.abs(x))))
        curve.relative_mae = _relative_percent(mae, reference.mae, floor)
        curve.relative_mse = _relative_percent(mse, reference.mse, floor * floor)
    return curve


class LdaModel:
    """Gaussian equal-covariance discriminant.

    means : (C, d) class means.
    covariance : (d, d) pooled within-class covariance, regularized.
    priors : (C,) class frequencies.
    class_values : (C,) the labels predict() reports, in mean order.
    """

    def __init__(self, means, covariance, priors, class_values):
        self.means = np.asarray(means, dtype=np.float64)
        self.covariance = np.asarray(covariance, dtype=np.float64)
        self.priors = np.asarray(priors, dtype=np.float64)
        self.class_values = np.asarray(class_values)
        try:
            factor = scipy.linalg.cho_factor(self.covariance, check_finite=False)
        except np.linalg.LinAlgError:
            raise np.linalg.LinAlgError(
                "pooled covariance is singular; refit with a nonzero ridge"
            ) from None
        # precompute discriminant weights: w_c = cov^-1 mu_c
        self._weights = scipy.linalg.cho_solve(
            factor, self.means.T, check_finite=False
        )
        self._offsets = -0.5 * np.sum(self.means.T * self._weights, axis=0) + np.log(
            self.priors
        )

    @property
    def d(self) -> int:
        return self.means.shape[1]

    def predict(self, x):
        x = as_matrix(x, "x")
        if x.shape[1] != self.d:
            raise ValueError(f"x has {x.shape[1]} columns, model expects {self.d}")
        scores = x @ self._weights + self._offsets
        return self.class_values[np.argmax(scores, axis=1)]


def fit_lda(train: LabeledDataset, ridge=1e-6) -> LdaModel:
    """Pooled-covariance discriminant with trace-scaled ridge.

    The ridge adds ridge * trace(cov)/d to the diagonal, which keeps the
    covariance invertible on rank-deficient inputs such as data
    reconstructed from few coordinates.
    """
    if train.labels is None:
        raise ValueError("training data has no labels")
    if ridge < 0:
        raise ValueError(f"ridge must be non-negative, got {ridge}")
    x, labels = train.data, train.labels
    n, d = x.shape
    n_classes = train.n_classes
    if n_classes < 2:
        raise ValueError("need at least 2 classes")
    means = np.empty((n_classes, d))
    priors = np.empty(n_classes)
    scatter = np.zeros((d, d))
    for c in range(n_classes):
        rows = x[labels == c]
        if rows.shape[0] < 2:
            raise ValueError(
                f"class {train.class_values[c]} has {rows.shape[0]} samples, need >= 2"
            )
        means[c] = rows.mean(axis=0)
        priors[c] = rows.shape[0] / n
        centered = rows - means[c]
        scatter += centered.T @ centered
    covariance = scatter / (n - n_classes)
    if ridge > 0:
        covariance = covariance + (ridge * np.trace(covariance) / d) * np.eye(d)
    return LdaModel(means, covariance, priors, train.class_values)


def classification_error(predicted, truth) -> float:
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape or predicted.ndim != 1:
        raise ValueError("predicted and truth must be equal-length vectors")
    if predicted.shape[0] == 0:
        raise ValueError("no predictions to score")
    return float(np.mean(predicted != truth))


class LinearRetrieval:
    """Multi-output least-squares map with intercept."""

    def __init__(self, weights, intercept):
        self.weights = np.asarray(weights, dtype=np.float64)
        self.intercept = np.asarray(intercept, dtype=np.float64)

    def predict(self, features):
        features = as_matrix(features, "features")
        if features.shape[1] != self.weights.shape[0]:
            raise ValueError(
                f"features have {features.shape[1]} columns, "
                f"map expects {self.weights.shape[0]}"
            )
        return features @ self.weights + self.intercept


def _as_targets(y):
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    if y.ndim != 2 or not np.isfinite(y).all():
        raise ValueError("targets must be a finite vector or matrix")
    return y


def fit_linear_retrieval(features, targets) -> LinearRetrieval:
    """Least-squares fit of targets on features plus intercept.

    A rank-deficient design is still solved (minimum-norm pseudo-inverse
    solution) but reported, since it usually means redundant features.
    """
    f = as_matrix(features, "features")
    y = _as_targets(targets)
    if y.shape[0] != f.shape[0]:
        raise ValueError("features and targets row counts differ")
    if f.shape[0] <= f.shape[1]:
        raise ValueError(
            f"need more rows ({f.shape[0]}) than feature columns ({f.shape[1]})"
        )
    design = np.column_stack([f, np.ones(f.shape[0])])
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < design.shape[1]:
        warnings.warn(
            f"feature design is rank deficient ({rank} < {design.shape[1]}); "
            "using the minimum-norm solution",
            RuntimeWarning,
            stacklevel=2,
        )
    return LinearRetrieval(coef[:-1], coef[-1])


def retrieval_mae(mapping: LinearRetrieval, features, targets) -> float:
    """Mean absolute prediction error over all target entries."""
    y = _as_targets(targets)
    return float(np.mean(np.abs(mapping.predict(features) - y)))


def make_retrieval_task(n_train=4000, n_test=4000, seed=0, n_inputs=40, noise_std=0.1):
    """Synthetic stand-in for retrieval from compressed measurements.

    Six latent variables drive both sides: the inputs are orthogonal
    channels carrying one latent each, contaminated by a curved function
    of earlier (higher-variance) latents along the same direction, plus
    isotropic noise; the targets are linear in the clean latents.  A
    reduction that strips the predictable curvature from each channel
    yields features that are linearly closer to the latents than raw
    principal scores are.

    Returns (x_train, y_train, x_test, y_test).
    """
    if n_train < 1 or n_test < 1:
        raise ValueError("need at least one train and one test row")
    if n_inputs < 6:
        raise ValueError("n_inputs must be at least 6")
    rng = np.random.default_rng(seed)
    n = n_train + n_test
    s = rng.uniform(-1.0, 1.0, (n, 6))
    directions = np.linalg.qr(rng.normal(size=(n_inputs, 6)))[0].T
    amps = np.array([3.0, 2.55, 2.15, 1.8, 1.5, 1.25])
    curv = np.array([0.0, 1.2, 1.1, 1.0, 0.9, 0.8])
    # zero-mean curved contaminants, each a function of earlier latents only
    g = np.column_stack(
        [
            np.zeros(n),
            s[:, 0] ** 2 - 1.0 / 3.0,
            s[:, 0] * s[:, 1],
            s[:, 1] ** 2 - 1.0 / 3.0,
            s[:, 1] * s[:, 2],
            s[:, 2] ** 2 - 1.0 / 3.0,
        ]
    )
    channels = amps * s + curv * g
    x = channels @ directions + rng.normal(0.0, noise_std, (n, n_inputs))
    y = s @ rng.normal(size=(6, 4))
    return x[:n_train], y[:n_train], x[n_train:], y[n_train:]


def retrieval_protocol(x_train, y_train, x_test, y_test, ks, fitters, seed=0, width=None):
    """Retrieval MAE per method per feature count.

    Inputs are first projected onto their leading principal subspace
    (width defaults to max(ks) + 2): coordinates beyond the kept features
    never reach the retrieval map, and the projection leaves the kept
    principal scores unchanged, so this is purely a cost cut for the
    nonlinear fits.  fitters maps method name to (z_train, seed) ->
    fitted model exposing transform.  Returns row dicts (method, k, mae).
    """
    x_train = as_matrix(x_train, "x_train")
    x_test = as_matrix(x_test, "x_test")
    ks = sorted(int(k) for k in ks)
    if not ks or ks[0] < 1:
        raise ValueError("ks must be positive integers")
    if width is None:
        width = min(x_train.shape[1], max(ks) + 2)
    if ks[-1] > width:
        raise ValueError(f"k={ks[-1]} exceeds the projection width {width}")
    base = fit_pca(x_train)
    z_train = base.transform(x_train)[:, :width]
    z_test = base.transform(x_test)[:, :width]
    rows = []
    for name, fit in fitters.items():
        model = fit(z_train, seed)
        f_train = model.transform(z_train)
        f_test = model.transform(z_test)
        for k in ks:
            mapping = fit_linear_retrieval(f_train[:, :k], y_train)
            rows.append(
                {
                    "method": name,
                    "k": k,
                    "mae": retrieval_mae(mapping, f_test[:, :k], y_test),
                }
            )
    return rows


def classification_protocol(
    dataset: LabeledDataset,
    ks,
    fitters,
    seeds=(0,),
    train_fraction=0.5,
    ridge=1e-6,
):
    """Classification error of a linear discriminant on reconstructed data.

    Per seed: split the labeled data, fit each reducer on the training
    matrix, and for every width k train the discriminant on
    reconstruct(train, k) and score it on reconstruct(test, k).  Returns
    row dicts (method, seed, k, error).
    """
    ks = [int(k) for k in ks]
    rows = []
    for seed in seeds:
        train, test = split(dataset, SplitSpec(train_fraction, int(seed)))
        for name, fit in fitters.items():
            model = fit(train.data, int(seed))
            for k in ks:
                rec_train = model.reconstruct(train.data, k)
                rec_test = model.reconstruct(test.data, k)
                lda = fit_lda(LabeledDataset(rec_train, train.labels), ridge)
                error = classification_error(lda.predict(rec_test), test.labels)
                rows.append(
                    {"method": name, "seed": int(seed), "k": k, "error": error}
                )
    return rows
