"""Matrix-free kernel ridge regression classification.

Training solves ``(K + lambda*I) alpha = y`` with plain conjugate
gradients, where every product with the ANOVA kernel matrix K runs
through the per-window fast summation operators.  Prediction evaluates
the fitted expansion at test nodes through the same machinery and takes
the sign.  Models serialize to a versioned JSON document.
"""

import base64
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .anova import AnovaKernelOperator, WindowSet, build_windows, mis_scores
from .data import RNG_NAME, ScalerStats, rng_from_seed, zscore_apply, zscore_fit
from .errors import NumericalError, ShapeError, ValidationError

MODEL_FORMAT = "krr-model/1"


@dataclass(frozen=True)
class KrrConfig:
    sigma: float = 1.0
    lam: float = 1.0
    cg_tol: float = 1e-3
    cg_maxiter: int = 1000
    profile: str = "default"
    mis_threshold: float = 0.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValidationError(f"sigma must be positive, got {self.sigma}")
        if self.lam <= 0:
            raise ValidationError(f"lambda must be positive, got {self.lam}")
        if not 0.0 < self.cg_tol < 1.0:
            raise ValidationError(f"cg_tol must lie in (0, 1), got {self.cg_tol}")
        if self.cg_maxiter < 1:
            raise ValidationError("cg_maxiter must be at least 1")
        if self.mis_threshold < 0:
            raise ValidationError("mis_threshold must be nonnegative")

    def to_dict(self):
        return {
            "sigma": self.sigma,
            "lambda": self.lam,
            "cg_tol": self.cg_tol,
            "cg_maxiter": self.cg_maxiter,
            "profile": self.profile,
            "mis_threshold": self.mis_threshold,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            sigma=d["sigma"],
            lam=d["lambda"],
            cg_tol=d["cg_tol"],
            cg_maxiter=d["cg_maxiter"],
            profile=d["profile"],
            mis_threshold=d["mis_threshold"],
        )


@dataclass
class CgResult:
    x: np.ndarray
    iterations: int
    residual: float
    converged: bool


def cg_solve(apply_A, b, tol=1e-3, maxiter=1000):
    """Conjugate gradients for SPD systems, x0 = 0, no preconditioner.

    Stops when ``||b - A x|| <= tol * ||b||`` or after ``maxiter``
    iterations (reported, not fatal).  NaN or Inf in the recurrence
    raises a NumericalError naming the iteration.
    """
    b = np.asarray(b, dtype=np.float64)
    b_norm = float(np.linalg.norm(b))
    x = np.zeros_like(b)
    if b_norm == 0.0:
        return CgResult(x, 0, 0.0, True)
    r = b.copy()
    p = r.copy()
    rs = float(r @ r)
    for it in range(1, maxiter + 1):
        Ap = np.asarray(apply_A(p), dtype=np.float64)
        if not np.all(np.isfinite(Ap)):
            raise NumericalError(f"CG breakdown: non-finite operator output at iteration {it}")
        pAp = float(p @ Ap)
        if not math.isfinite(pAp) or pAp <= 0.0:
            raise NumericalError(
                f"CG breakdown: non-positive curvature {pAp:.3e} at iteration {it}"
            )
        step = rs / pAp
        x += step * p
        r -= step * Ap
        rs_new = float(r @ r)
        if not math.isfinite(rs_new):
            raise NumericalError(f"CG breakdown: non-finite residual at iteration {it}")
        if math.sqrt(rs_new) <= tol * b_norm:
            return CgResult(x, it, math.sqrt(rs_new) / b_norm, True)
        p = r + (rs_new / rs) * p
        rs = rs_new
    return CgResult(x, maxiter, math.sqrt(rs) / b_norm, False)


class KrrModel:
    """Fitted KRR classifier: coefficients, windows, scaler, training nodes."""

    def __init__(self, alpha, config, windows, scaler, train_scaled, column_names,
                 cg_iterations, cg_residual, cg_converged):
        self.alpha = np.asarray(alpha, dtype=np.float64)
        self.config = config
        self.windows = windows
        self.scaler = scaler
        self.train_scaled = np.asarray(train_scaled, dtype=np.float64)
        self.column_names = tuple(column_names)
        self.cg_iterations = int(cg_iterations)
        self.cg_residual = float(cg_residual)
        self.cg_converged = bool(cg_converged)

    @property
    def n_train(self):
        return self.train_scaled.shape[0]

    @property
    def n_features(self):
        return self.train_scaled.shape[1]


def _check_training_input(X, y):
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValidationError("training needs at least 2 samples")
    if y.shape != (X.shape[0],):
        raise ShapeError("labels must match the number of training rows")
    values = np.unique(y)
    if not np.all(np.isin(values, (-1, 1))):
        raise ValidationError(f"labels must be -1 or +1, got {values}")
    if values.size < 2:
        raise ValidationError("training data must contain both classes")
    return X, y.astype(np.float64)


def fit(X_train, y_train, config, column_names=None):
    """Fit the NFFT-accelerated ANOVA kernel ridge classifier."""
    X, y = _check_training_input(X_train, y_train)
    if column_names is None:
        column_names = tuple(f"f{i}" for i in range(X.shape[1]))
    scaler = zscore_fit(X)
    Xs = zscore_apply(scaler, X)
    report = mis_scores(Xs, y_train)
    windows = build_windows(report, config.mis_threshold)
    operator = AnovaKernelOperator(Xs, windows, config.sigma, config.profile)
    result = cg_solve(
        lambda v: operator.apply(v) + config.lam * v,
        y,
        tol=config.cg_tol,
        maxiter=config.cg_maxiter,
    )
    return KrrModel(
        alpha=result.x,
        config=config,
        windows=windows,
        scaler=scaler,
        train_scaled=Xs,
        column_names=column_names,
        cg_iterations=result.iterations,
        cg_residual=result.residual,
        cg_converged=result.converged,
    )


def decision_values(model, X_test):
    """Evaluate s(z_i) = sum_j alpha_j kappa_anova(z_i, x_j) at test rows."""
    X_test = np.atleast_2d(np.asarray(X_test, dtype=np.float64))
    if X_test.shape[1] != model.n_features:
        raise ValidationError(
            f"test data has {X_test.shape[1]} columns, model was trained on {model.n_features}"
        )
    Zs = zscore_apply(model.scaler, X_test)
    operator = AnovaKernelOperator(
        model.train_scaled,
        model.windows,
        model.config.sigma,
        model.config.profile,
        targets=Zs,
    )
    return operator.apply(model.alpha)


def predict(model, X_test):
    """Class labels in {-1, +1}; the decision threshold is 0 with sign(0) -> +1."""
    values = decision_values(model, X_test)
    return np.where(values >= 0.0, 1, -1).astype(np.int64)


def grid_search(X_train, y_train, sigma_grid, lambda_grid, config=None, seed=0,
                threads=1, column_names=None):
    """Select (sigma, lambda) by accuracy on an inner 50:50 holdout.

    Every cell fits on the same seeded half of the training data and
    scores on the held-out half; ties prefer smaller lambda, then
    smaller sigma.  The winner is refitted on all training data.  Cells
    whose fit fails are marked in the table instead of aborting the
    sweep.  Returns ``(model, best_config, table)``.
    """
    sigma_grid = [float(s) for s in sigma_grid]
    lambda_grid = [float(l) for l in lambda_grid]
    if not sigma_grid or not lambda_grid:
        raise ValidationError("parameter grids must be nonempty")
    if config is None:
        config = KrrConfig()
    X, y = _check_training_input(X_train, y_train)

    n = X.shape[0]
    order = rng_from_seed(seed).permutation(n)
    half = n // 2
    fit_idx, val_idx = order[:half], order[half:]
    if len(np.unique(y[fit_idx])) < 2:
        raise ValidationError("inner grid-search split lost a class; dataset too small")

    def evaluate(cell):
        sigma, lam = cell
        trial = replace(config, sigma=sigma, lam=lam)
        try:
            model = fit(X[fit_idx], y[fit_idx], trial, column_names)
            labels = predict(model, X[val_idx])
            accuracy = float(np.mean(labels == y[val_idx]))
            return {
                "sigma": sigma,
                "lambda": lam,
                "accuracy": accuracy,
                "cg_iterations": model.cg_iterations,
                "status": "ok",
            }
        except (ValidationError, NumericalError) as exc:
            return {
                "sigma": sigma,
                "lambda": lam,
                "accuracy": float("nan"),
                "cg_iterations": 0,
                "status": f"failed: {exc}",
            }

    cells = [(sigma, lam) for sigma in sigma_grid for lam in lambda_grid]
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            table = list(pool.map(evaluate, cells))
    else:
        table = [evaluate(cell) for cell in cells]

    ok = [row for row in table if row["status"] == "ok"]
    if not ok:
        raise NumericalError("every grid-search cell failed")
    best = max(ok, key=lambda row: (row["accuracy"], -row["lambda"], -row["sigma"]))
    best_config = replace(config, sigma=best["sigma"], lam=best["lambda"])
    model = fit(X, y, best_config, column_names)
    return model, best_config, table


def _encode_array(arr):
    return base64.b64encode(np.ascontiguousarray(arr, dtype="<f8").tobytes()).decode("ascii")


def _decode_array(text, shape):
    arr = np.frombuffer(base64.b64decode(text.encode("ascii")), dtype="<f8")
    return arr.reshape(shape).astype(np.float64)


def model_to_dict(model):
    return {
        "format": MODEL_FORMAT,
        "config": model.config.to_dict(),
        "column_names": list(model.column_names),
        "windows": model.windows.to_dict(),
        "scaler": {
            "means": [float(v) for v in model.scaler.means],
            "stds": [float(v) for v in model.scaler.stds],
        },
        "train_shape": list(model.train_scaled.shape),
        "alpha_b64": _encode_array(model.alpha),
        "train_scaled_b64": _encode_array(model.train_scaled),
        "cg": {
            "iterations": model.cg_iterations,
            "residual": model.cg_residual,
            "converged": model.cg_converged,
        },
        "rng": RNG_NAME,
    }


def model_from_dict(doc):
    if doc.get("format") != MODEL_FORMAT:
        raise ValidationError(
            f"unsupported model format {doc.get('format')!r}, expected {MODEL_FORMAT}"
        )
    shape = tuple(doc["train_shape"])
    return KrrModel(
        alpha=_decode_array(doc["alpha_b64"], (shape[0],)),
        config=KrrConfig.from_dict(doc["config"]),
        windows=WindowSet(tuple(tuple(w) for w in doc["windows"]["windows"])),
        scaler=ScalerStats(
            means=np.asarray(doc["scaler"]["means"], dtype=np.float64),
            stds=np.asarray(doc["scaler"]["stds"], dtype=np.float64),
        ),
        train_scaled=_decode_array(doc["train_scaled_b64"], shape),
        column_names=tuple(doc["column_names"]),
        cg_iterations=doc["cg"]["iterations"],
        cg_residual=doc["cg"]["residual"],
        cg_converged=doc["cg"]["converged"],
    )


def save_model(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=1)
        fh.write("\n")


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
