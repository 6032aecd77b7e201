"""CSV ingestion/emission, centering, and deterministic splitting.

Data matrices are plain float64 arrays with one sample per row.  Non-finite
values are rejected outright: none of the downstream methods has a
missing-data story, so silently imputing would only hide problems.
"""

import csv
from dataclasses import dataclass, field

import numpy as np


class DataError(ValueError):
    """Malformed input data (ragged rows, non-numeric cells, NaN/Inf)."""


def as_matrix(values, name="X"):
    """Validate and return a 2-d finite float64 array."""
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 2:
        raise DataError(f"{name} must be 2-d, got shape {x.shape}")
    if x.shape[0] < 1 or x.shape[1] < 1:
        raise DataError(f"{name} must have at least one row and column")
    if not np.isfinite(x).all():
        raise DataError(f"{name} contains NaN or Inf")
    return x


@dataclass
class LabeledDataset:
    """A data matrix plus per-row labels.

    ``labels`` is either an integer class vector (classification; classes
    remapped to 0..C-1 at construction, original values kept in
    ``class_values``) or a float matrix of regression targets.
    """

    data: np.ndarray
    labels: np.ndarray
    class_values: np.ndarray | None = field(default=None)

    def __post_init__(self):
        self.data = as_matrix(self.data, "data")
        labels = np.asarray(self.labels)
        if labels.shape[0] != self.data.shape[0]:
            raise DataError(
                f"label count {labels.shape[0]} != row count {self.data.shape[0]}"
            )
        if labels.ndim == 1 and np.issubdtype(labels.dtype, np.integer):
            if self.class_values is None:
                self.class_values, self.labels = np.unique(labels, return_inverse=True)
            else:
                self.labels = labels
        elif labels.ndim in (1, 2):
            self.labels = as_matrix(
                labels.reshape(labels.shape[0], -1).astype(np.float64), "labels"
            )
        else:
            raise DataError(f"labels must be 1-d or 2-d, got shape {labels.shape}")

    @property
    def n_classes(self) -> int:
        if self.class_values is None:
            raise DataError("dataset has regression targets, not class labels")
        return len(self.class_values)

    def take(self, rows):
        labels = self.labels[rows]
        return LabeledDataset(self.data[rows], labels, class_values=self.class_values)


@dataclass(frozen=True)
class SplitSpec:
    """Deterministic train/test partition: same seed, same split."""

    train_fraction: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise DataError(
                f"train_fraction must lie in (0, 1), got {self.train_fraction}"
            )


def _parse_cell(text, row, col):
    try:
        value = float(text)
    except ValueError:
        raise DataError(
            f"non-numeric cell {text!r} at row {row}, column {col}"
        ) from None
    if not np.isfinite(value):
        raise DataError(f"non-finite cell {text!r} at row {row}, column {col}")
    return value


def load_csv(path, has_header=False, label_column=None):
    """Load a CSV file of one sample per row.

    label_column may be None (returns a plain matrix), "last", or a 0-based
    column index; when given, that column is stripped into integer class
    labels and a LabeledDataset is returned.  Row/column positions in error
    messages are 1-based file coordinates.
    """
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for line_no, record in enumerate(reader, start=1):
            if not record or (len(record) == 1 and not record[0].strip()):
                continue  # skip blank lines
            if has_header and line_no == 1:
                continue
            rows.append(
                (line_no, [_parse_cell(c.strip(), line_no, j + 1) for j, c in enumerate(record)])
            )
    if not rows:
        raise DataError(f"{path}: no data rows")
    width = len(rows[0][1])
    for line_no, values in rows:
        if len(values) != width:
            raise DataError(
                f"{path}: row {line_no} has {len(values)} cells, expected {width}"
            )
    matrix = np.array([values for _, values in rows], dtype=np.float64)
    if label_column is None:
        return as_matrix(matrix, str(path))

    col = width - 1 if label_column == "last" else int(label_column)
    if not 0 <= col < width:
        raise DataError(f"label column {col} out of range for {width} columns")
    raw = matrix[:, col]
    if not np.all(raw == np.round(raw)):
        raise DataError("label column contains non-integer values")
    features = np.delete(matrix, col, axis=1)
    return LabeledDataset(features, raw.astype(np.int64))


def save_csv(matrix, path, header=None):
    """Write a matrix as CSV with enough digits for an exact numeric round trip."""
    matrix = as_matrix(matrix, "matrix")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if header is not None:
            writer.writerow(header)
        for row in matrix:
            writer.writerow([format(v, ".17g") for v in row])


def center(x):
    """Subtract column means; returns (centered, mean)."""
    x = as_matrix(x)
    mean = x.mean(axis=0)
    return x - mean, mean


def split(dataset: LabeledDataset, spec: SplitSpec):
    """Partition rows into train/test via a seeded permutation.

    Train size is floor(train_fraction * N); the remainder goes to test.
    Within each part the original row order is preserved.
    """
    n = dataset.data.shape[0]
    n_train = int(np.floor(spec.train_fraction * n))
    if not 1 <= n_train <= n - 1:
        raise DataError(
            f"split of {n} rows at fraction {spec.train_fraction} leaves an empty side"
        )
    perm = np.random.default_rng(spec.seed).permutation(n)
    train_rows = np.sort(perm[:n_train])
    test_rows = np.sort(perm[n_train:])
    return dataset.take(train_rows), dataset.take(test_rows)
