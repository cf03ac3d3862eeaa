"""Dataset ingestion, z-score scaling, class balancing, and splitting.

All randomness flows through numpy's seedable PCG64 generator
(``numpy.random.default_rng``) so splits and subsamples reproduce
exactly for a given seed; reports record the generator name.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

RNG_NAME = "numpy-pcg64"


def rng_from_seed(seed):
    return np.random.default_rng(seed)


@dataclass
class Dataset:
    """Feature matrix with labels in {-1, +1} and column names."""

    X: np.ndarray
    y: np.ndarray
    column_names: tuple

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        self.y = np.ascontiguousarray(self.y, dtype=np.int64)
        self.column_names = tuple(self.column_names)
        if self.X.ndim != 2:
            raise ValidationError("feature matrix must be 2-dimensional")
        if self.y.shape != (self.X.shape[0],):
            raise ValidationError("labels must match the number of rows")
        if len(self.column_names) != self.X.shape[1]:
            raise ValidationError("column_names must match the number of features")
        if not np.all(np.isfinite(self.X)):
            raise ValidationError("feature matrix contains non-finite values")
        if not np.all(np.isin(self.y, (-1, 1))):
            raise ValidationError("labels must be -1 or +1")

    @property
    def n_samples(self):
        return self.X.shape[0]

    @property
    def n_features(self):
        return self.X.shape[1]

    def take(self, indices):
        return Dataset(self.X[indices], self.y[indices], self.column_names)


def load_csv(path, label_column, positive_label):
    """Load an RFC-4180-style CSV with a header row into a Dataset.

    The label column must contain exactly two distinct values;
    ``positive_label`` maps to +1 and the other value to -1.  Any
    non-label cell that does not parse as a finite real is an error
    naming the offending data row and column.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: file is empty, header row required") from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise ValidationError(f"{path}: label column {label_column!r} not in header {header}")
        label_idx = header.index(label_column)
        feature_names = tuple(h for i, h in enumerate(header) if i != label_idx)

        rows = []
        labels = []
        for row_no, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise ValidationError(
                    f"{path}: data row {row_no} has {len(row)} cells, expected {len(header)}"
                )
            values = []
            for i, cell in enumerate(row):
                if i == label_idx:
                    labels.append(cell.strip())
                    continue
                try:
                    value = float(cell)
                except ValueError:
                    raise ValidationError(
                        f"{path}: data row {row_no}, column {header[i]!r}: "
                        f"cannot parse {cell!r} as a real number"
                    ) from None
                if not math.isfinite(value):
                    raise ValidationError(
                        f"{path}: data row {row_no}, column {header[i]!r}: "
                        f"non-finite value {cell!r}"
                    )
                values.append(value)
            rows.append(values)

    if not rows:
        raise ValidationError(f"{path}: no data rows")
    distinct = sorted(set(labels))
    if len(distinct) != 2:
        raise ValidationError(
            f"{path}: label column must have exactly 2 distinct values, got {distinct}"
        )
    positive = str(positive_label)
    if positive not in distinct:
        raise ValidationError(
            f"{path}: positive label {positive!r} not among label values {distinct}"
        )
    y = np.array([1 if lab == positive else -1 for lab in labels], dtype=np.int64)
    return Dataset(np.array(rows, dtype=np.float64), y, feature_names)


@dataclass
class ScalerStats:
    """Per-feature mean and population standard deviation from training data.

    Zero standard deviations are replaced by 1 so constant columns map to
    all-zeros.
    """

    means: np.ndarray
    stds: np.ndarray


def zscore_fit(train):
    """Fit scaler statistics from training rows only (population std)."""
    X = train.X if isinstance(train, Dataset) else np.atleast_2d(np.asarray(train, dtype=np.float64))
    if X.shape[0] == 0:
        raise ValidationError("cannot fit a scaler on an empty dataset")
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    stds = np.where(stds == 0.0, 1.0, stds)
    return ScalerStats(means=means, stds=stds)


def zscore_apply(stats, X):
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != stats.means.shape[0]:
        raise ValidationError(
            f"matrix has {X.shape[1]} columns, scaler was fitted on {stats.means.shape[0]}"
        )
    return (X - stats.means) / stats.stds


def balance_undersample(ds, seed=0):
    """Equalize class counts by randomly dropping majority-class rows.

    Sampling is without replacement; the relative order of kept rows is
    preserved and no rows are fabricated.
    """
    classes, counts = np.unique(ds.y, return_counts=True)
    if classes.size < 2:
        raise ValidationError("cannot balance a single-class dataset")
    minority = int(counts.min())
    rng = rng_from_seed(seed)
    keep = []
    for cls, count in zip(classes, counts):
        idx = np.flatnonzero(ds.y == cls)
        if count > minority:
            idx = rng.choice(idx, size=minority, replace=False)
        keep.append(idx)
    keep = np.sort(np.concatenate(keep))
    return ds.take(keep)


def split_train_test(ds, fraction=0.5, seed=0, shuffle=True):
    """Partition rows into (train, test) with ``fraction`` going to train.

    With ``shuffle`` the rows are permuted by the seeded generator first;
    without it the leading rows become the training set (for datasets
    with a predefined train/test structure).
    """
    if not 0.0 < fraction < 1.0:
        raise ValidationError(f"split fraction must lie in (0, 1), got {fraction}")
    n = ds.n_samples
    if n < 2:
        raise ValidationError("need at least 2 rows to split")
    n_train = int(round(n * fraction))
    n_train = min(max(n_train, 1), n - 1)
    order = rng_from_seed(seed).permutation(n) if shuffle else np.arange(n)
    return ds.take(order[:n_train]), ds.take(order[n_train:])
