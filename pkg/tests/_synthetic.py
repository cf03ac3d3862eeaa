"""Synthetic data generators shared across the test suite."""

import numpy as np


def make_blobs(n, d, seed=0, separation=6.0, std=1.0):
    """Two Gaussian clusters with centers ``separation`` apart (in units of
    the cluster standard deviation when std=1), labels -1/+1, shuffled."""
    rng = np.random.default_rng(seed)
    n_pos = n // 2
    offset = (separation / 2.0) / np.sqrt(d)
    X = np.vstack(
        [
            rng.normal(loc=-offset, scale=std, size=(n - n_pos, d)),
            rng.normal(loc=+offset, scale=std, size=(n_pos, d)),
        ]
    )
    y = np.concatenate([-np.ones(n - n_pos, dtype=np.int64), np.ones(n_pos, dtype=np.int64)])
    order = rng.permutation(n)
    return X[order], y[order]
