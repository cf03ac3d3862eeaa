"""Feature grouping and the windowed Gaussian ANOVA kernel operator.

Features are ranked by a histogram mutual-information score against the
binary label, thresholded, and chunked three at a time into disjoint
index windows.  The combined kernel is the equally weighted sum of one
Gaussian sub-kernel per window, each applied matrix-free through its own
fast summation operator.
"""

import math

import numpy as np

from .errors import ShapeError, ValidationError
from .fastsum import FastsumOperator, GaussianKernel

WINDOW_SIZE = 3


class MisReport:
    """Per-feature mutual information scores (nats) and the induced ranking."""

    def __init__(self, scores):
        self.scores = np.asarray(scores, dtype=np.float64)
        # descending score, ties broken by ascending feature index
        order = np.lexsort((np.arange(self.scores.size), -self.scores))
        self.ranking = order.astype(np.int64)

    def to_dict(self):
        return {
            "scores": [float(s) for s in self.scores],
            "ranking": [int(i) for i in self.ranking],
        }


def _check_labels(y):
    y = np.asarray(y)
    if y.ndim != 1 or y.size == 0:
        raise ShapeError("labels must form a nonempty vector")
    values = np.unique(y)
    if not np.all(np.isin(values, (-1, 1))):
        raise ValidationError(f"labels must be -1 or +1, got values {values}")
    if values.size < 2:
        raise ValidationError("both classes must be present")
    return y.astype(np.int64)


def mis_scores(X, y, bins=None):
    """Plug-in histogram estimate of I(feature; label) per feature, in nats.

    Feature values are binned into ``bins`` equal-width bins over their
    observed range (default ``min(64, ceil(sqrt(N)))``); the score is the
    mutual information of the joint histogram with the binary label.
    Constant features score exactly 0.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.ndim != 2 or X.shape[0] == 0:
        raise ShapeError("feature matrix must be a nonempty (N, d) array")
    y = _check_labels(y)
    if y.shape[0] != X.shape[0]:
        raise ShapeError("feature matrix and labels must have the same length")
    n = X.shape[0]
    if n < 2:
        raise ValidationError("mutual information needs at least 2 samples")
    if bins is None:
        bins = min(64, math.ceil(math.sqrt(n)))

    pos = y > 0
    n_pos = int(pos.sum())
    p_label = np.array([(n - n_pos) / n, n_pos / n])

    scores = np.empty(X.shape[1])
    for j in range(X.shape[1]):
        col = X[:, j]
        lo, hi = col.min(), col.max()
        if hi == lo:
            scores[j] = 0.0
            continue
        idx = np.minimum((bins * (col - lo) / (hi - lo)).astype(np.int64), bins - 1)
        joint = np.zeros((bins, 2))
        joint[:, 0] = np.bincount(idx[~pos], minlength=bins)
        joint[:, 1] = np.bincount(idx[pos], minlength=bins)
        joint /= n
        p_feat = joint.sum(axis=1)
        prod = p_feat[:, None] * p_label[None, :]
        mask = joint > 0
        scores[j] = float(np.sum(joint[mask] * np.log(joint[mask] / prod[mask])))
    return MisReport(scores)


class WindowSet:
    """Disjoint feature index windows W_l with weights eta_l = 1/P."""

    def __init__(self, windows):
        windows = tuple(tuple(int(i) for i in w) for w in windows)
        if not windows:
            raise ValidationError("window set must not be empty")
        seen = set()
        for w in windows:
            if not 1 <= len(w) <= WINDOW_SIZE:
                raise ValidationError(f"window size must be 1..{WINDOW_SIZE}, got {len(w)}")
            if seen.intersection(w):
                raise ValidationError("windows must be pairwise disjoint")
            seen.update(w)
        for w in windows[:-1]:
            if len(w) != WINDOW_SIZE:
                raise ValidationError("only the last window may hold fewer than 3 features")
        self.windows = windows
        self.weights = tuple([1.0 / len(windows)] * len(windows))

    def __len__(self):
        return len(self.windows)

    def __iter__(self):
        return iter(self.windows)

    def retained_features(self):
        return sorted(i for w in self.windows for i in w)

    def to_dict(self):
        return {"windows": [list(w) for w in self.windows], "weights": list(self.weights)}


def build_windows(report, threshold=0.0):
    """Drop features scoring below ``threshold`` and chunk the rest into
    3-feature windows following the MIS ranking."""
    if threshold < 0:
        raise ValidationError("threshold must be nonnegative")
    kept = [int(i) for i in report.ranking if report.scores[i] >= threshold]
    if not kept:
        raise ValidationError(
            f"no feature has a mutual information score >= {threshold}; empty model"
        )
    windows = [tuple(kept[i : i + WINDOW_SIZE]) for i in range(0, len(kept), WINDOW_SIZE)]
    return WindowSet(windows)


class AnovaKernelOperator:
    """Matrix-free multiplication by K = sum_l eta_l K_l.

    Each K_l is the Gaussian kernel with shared length scale ``sigma``
    restricted to the feature columns of window W_l, applied through its
    own fast summation operator.
    """

    def __init__(self, X, windows, sigma, profile="default", targets=None, config=None):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if not isinstance(windows, WindowSet):
            windows = WindowSet(windows)
        d = X.shape[1]
        for w in windows:
            if max(w) >= d or min(w) < 0:
                raise ValidationError(f"window {w} out of range for {d} columns")
        Z = None
        if targets is not None:
            Z = np.atleast_2d(np.asarray(targets, dtype=np.float64))
            if Z.shape[1] != d:
                raise ShapeError(f"targets have {Z.shape[1]} columns, expected {d}")
        kernel = GaussianKernel(sigma)
        self.windows = windows
        self.sigma = float(sigma)
        self.n_sources = X.shape[0]
        self.n_targets = X.shape[0] if Z is None else Z.shape[0]
        self.operators = [
            FastsumOperator(
                kernel,
                config,
                X[:, w],
                None if Z is None else Z[:, w],
                profile,
            )
            for w in windows
        ]

    def apply(self, alpha):
        alpha = np.asarray(alpha, dtype=np.float64)
        if alpha.shape != (self.n_sources,):
            raise ShapeError(f"alpha must have length {self.n_sources}, got {alpha.shape}")
        out = np.zeros(self.n_targets)
        # fixed summation order keeps serial runs bit-reproducible
        for weight, op in zip(self.windows.weights, self.operators):
            out += weight * op.apply(alpha)
        return out


def anova_build(X, windows, sigma, profile="default", targets=None, config=None):
    return AnovaKernelOperator(X, windows, sigma, profile, targets, config)


def anova_apply(op, alpha):
    return op.apply(alpha)
