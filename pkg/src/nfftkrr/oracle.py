"""Dense reference implementations used as ground truth in tests and
benchmarks: entrywise ANOVA kernel assembly and a direct KRR solve.

Deliberately naive; guarded against accidental large-scale use.
"""

import numpy as np
import scipy.linalg

from .errors import NumericalError, ValidationError
from .anova import WindowSet

SIZE_GUARD = 20000


def assemble_dense(X, windows, sigma, targets=None):
    """Dense kernel matrix K[i, j] = sum_l eta_l exp(-||x_i^Wl - x_j^Wl||^2 / sigma^2)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Z = X if targets is None else np.atleast_2d(np.asarray(targets, dtype=np.float64))
    if max(X.shape[0], Z.shape[0]) > SIZE_GUARD:
        raise ValidationError(
            f"dense assembly guard: {max(X.shape[0], Z.shape[0])} rows exceeds {SIZE_GUARD}"
        )
    if not isinstance(windows, WindowSet):
        windows = WindowSet(windows)
    K = np.zeros((Z.shape[0], X.shape[0]))
    for weight, w in zip(windows.weights, windows.windows):
        cols = list(w)
        xs = X[:, cols]
        zs = Z[:, cols]
        d2 = ((zs[:, None, :] - xs[None, :, :]) ** 2).sum(axis=2)
        K += weight * np.exp(-d2 / sigma**2)
    return K


def dense_krr_solve(K_dense, y, lam):
    """Direct factorization solve of (K + lam*I) alpha = y."""
    if lam <= 0:
        raise ValidationError(f"regularization parameter must be positive, got {lam}")
    K_dense = np.asarray(K_dense, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    system = K_dense + lam * np.eye(K_dense.shape[0])
    try:
        factor = scipy.linalg.cho_factor(system)
        alpha = scipy.linalg.cho_solve(factor, y)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(f"dense KRR factorization failed: {exc}") from exc
    residual = np.linalg.norm(system @ alpha - y) / max(np.linalg.norm(y), 1e-300)
    if residual > 1e-10:
        raise NumericalError(f"dense KRR solve residual {residual:.2e} exceeds 1e-10")
    return alpha
