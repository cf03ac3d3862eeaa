"""Command-line interface: mis-rank, fit, predict, gridsearch, bench-mvm.

Every command echoes a human-readable summary to stdout and, where a
report path applies, writes a schema-versioned JSON run report.  Exit
codes are structured: 0 success, 2 I/O error, 3 validation error,
4 numerical failure.
"""

import argparse
import csv
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .anova import mis_scores
from .data import (
    RNG_NAME,
    balance_undersample,
    load_csv,
    rng_from_seed,
    split_train_test,
)
from .errors import NumericalError, ValidationError
from .fastsum import GaussianKernel, direct_sum, fastsum_build
from .krr import (
    KrrConfig,
    decision_values,
    fit,
    grid_search,
    load_model,
    predict,
    save_model,
)
from .oracle import SIZE_GUARD

REPORT_FORMAT = "run-report/1"

EXIT_IO = 2
EXIT_VALIDATION = 3
EXIT_NUMERICAL = 4

TABLE2_SIGMA = [1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3]
TABLE2_LAMBDA = [1.0, 1e1, 1e2, 1e3]


def _write_report(path, payload):
    if path is None:
        return
    payload = {"format": REPORT_FORMAT, **payload}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def _resolve_sigma(args):
    if getattr(args, "gamma", None) is not None:
        if args.gamma <= 0:
            raise ValidationError(f"--gamma must be positive, got {args.gamma}")
        return 1.0 / math.sqrt(args.gamma)
    return args.sigma


def _float_list(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse {text!r} as comma-separated floats")
    if not values:
        raise argparse.ArgumentTypeError("list must not be empty")
    return values


def _int_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse {text!r} as comma-separated integers")
    if not values:
        raise argparse.ArgumentTypeError("list must not be empty")
    return values


def _add_data_flags(parser):
    parser.add_argument("csv", help="input CSV file with a header row")
    parser.add_argument("--label-column", required=True, help="name of the label column")
    parser.add_argument(
        "--positive-label", required=True, help="label value mapped to +1 (the other maps to -1)"
    )


def cmd_mis_rank(args):
    ds = load_csv(args.csv, args.label_column, args.positive_label)
    report = mis_scores(ds.X, ds.y)
    doc = report.to_dict()
    doc["column_names"] = list(ds.column_names)
    print(json.dumps(doc, indent=1))
    return 0


def cmd_fit(args):
    sigma = _resolve_sigma(args)
    config = KrrConfig(
        sigma=sigma,
        lam=args.lam,
        cg_tol=args.tol,
        cg_maxiter=args.maxiter,
        profile=args.profile,
        mis_threshold=args.threshold,
    )
    t0 = time.perf_counter()
    ds = load_csv(args.csv, args.label_column, args.positive_label)
    t_load = time.perf_counter() - t0

    t0 = time.perf_counter()
    model = fit(ds.X, ds.y, config, ds.column_names)
    t_fit = time.perf_counter() - t0

    t0 = time.perf_counter()
    train_accuracy = float(np.mean(predict(model, ds.X) == ds.y))
    t_predict = time.perf_counter() - t0

    save_model(model, args.model_out)
    _write_report(
        args.report_out,
        {
            "command": "fit",
            "config": config.to_dict(),
            "windows": model.windows.to_dict(),
            "timings": {"load_s": t_load, "fit_s": t_fit, "train_predict_s": t_predict},
            "accuracy": train_accuracy,
            "cg_iterations": model.cg_iterations,
            "cg_residual": model.cg_residual,
            "cg_converged": model.cg_converged,
            "n_samples": ds.n_samples,
            "n_features": ds.n_features,
            "seed": args.seed,
            "rng": RNG_NAME,
            "versions": {"nfftkrr": __version__},
        },
    )
    print(f"fitted on {ds.n_samples} samples, {ds.n_features} features")
    print(f"windows: {[list(w) for w in model.windows]}")
    print(
        f"cg: {model.cg_iterations} iterations, residual {model.cg_residual:.3e}, "
        f"converged={model.cg_converged}"
    )
    print(f"training accuracy: {train_accuracy:.4f}")
    print(f"model written to {args.model_out}")
    return 0


def _write_predictions(path, values, labels):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row_index", "decision_value", "label"])
        for i, (v, lab) in enumerate(zip(values, labels)):
            writer.writerow([i, repr(float(v)), int(lab)])


def _load_prediction_matrix(path, model, label_column, positive_label):
    """Feature matrix for prediction; labels come back when available."""
    if label_column is not None:
        ds = load_csv(path, label_column, positive_label)
        if ds.column_names != model.column_names:
            raise ValidationError(
                f"feature columns {list(ds.column_names)} do not match "
                f"the model's {list(model.column_names)}"
            )
        return ds.X, ds.y
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        if tuple(header) != model.column_names:
            raise ValidationError(
                f"feature columns {header} do not match the model's {list(model.column_names)}"
            )
        rows = []
        for row_no, row in enumerate(reader, start=1):
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise ValidationError(
                    f"{path}: data row {row_no}: cannot parse all cells as reals"
                ) from None
    X = np.asarray(rows, dtype=np.float64)
    if X.size == 0:
        raise ValidationError(f"{path}: no data rows")
    if not np.all(np.isfinite(X)):
        raise ValidationError(f"{path}: non-finite feature values")
    return X, None


def cmd_predict(args):
    model = load_model(args.model)
    t0 = time.perf_counter()
    X, y_true = _load_prediction_matrix(
        args.csv, model, args.label_column, args.positive_label
    )
    t_load = time.perf_counter() - t0

    t0 = time.perf_counter()
    values = decision_values(model, X)
    t_predict = time.perf_counter() - t0
    labels = np.where(values >= 0.0, 1, -1)

    _write_predictions(args.out, values, labels)
    accuracy = None if y_true is None else float(np.mean(labels == y_true))
    _write_report(
        args.report_out,
        {
            "command": "predict",
            "config": model.config.to_dict(),
            "timings": {"load_s": t_load, "predict_s": t_predict},
            "accuracy": accuracy,
            "n_samples": int(X.shape[0]),
            "seed": args.seed,
            "rng": RNG_NAME,
            "versions": {"nfftkrr": __version__},
        },
    )
    print(f"predicted {X.shape[0]} rows in {t_predict:.3f}s")
    if accuracy is not None:
        print(f"accuracy: {accuracy:.4f}")
    print(f"predictions written to {args.out}")
    return 0


def cmd_gridsearch(args):
    ds = load_csv(args.csv, args.label_column, args.positive_label)
    if args.balance:
        ds = balance_undersample(ds, seed=args.seed)
    train, test = split_train_test(
        ds, fraction=args.train_fraction, seed=args.seed, shuffle=not args.no_shuffle_split
    )
    config = KrrConfig(
        cg_tol=args.tol,
        cg_maxiter=args.maxiter,
        profile=args.profile,
        mis_threshold=args.threshold,
    )
    t0 = time.perf_counter()
    model, best_config, table = grid_search(
        train.X,
        train.y,
        args.sigma_grid,
        args.lambda_grid,
        config,
        seed=args.seed,
        threads=args.threads,
        column_names=ds.column_names,
    )
    t_search = time.perf_counter() - t0

    t0 = time.perf_counter()
    test_accuracy = float(np.mean(predict(model, test.X) == test.y))
    t_predict = time.perf_counter() - t0

    save_model(model, args.model_out)
    with open(args.table_out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sigma", "lambda", "accuracy", "cg_iterations", "status"])
        for row in table:
            writer.writerow(
                [row["sigma"], row["lambda"], row["accuracy"], row["cg_iterations"], row["status"]]
            )
    _write_report(
        args.report_out,
        {
            "command": "gridsearch",
            "config": best_config.to_dict(),
            "grid": {"sigma": args.sigma_grid, "lambda": args.lambda_grid},
            "timings": {"search_s": t_search, "test_predict_s": t_predict},
            "accuracy": test_accuracy,
            "cg_iterations": model.cg_iterations,
            "n_train": train.n_samples,
            "n_test": test.n_samples,
            "cells": len(table),
            "selection": "inner 50:50 holdout of the training split (no test-set selection)",
            "seed": args.seed,
            "rng": RNG_NAME,
            "versions": {"nfftkrr": __version__},
        },
    )
    print(f"evaluated {len(table)} grid cells in {t_search:.1f}s")
    print(f"best: sigma={best_config.sigma:g} lambda={best_config.lam:g}")
    print(f"test accuracy on held-out split: {test_accuracy:.4f}")
    print(f"model written to {args.model_out}, table to {args.table_out}")
    return 0


def cmd_bench_mvm(args):
    n_list = list(args.n_list)
    if any(n <= 0 for n in n_list) or n_list != sorted(n_list):
        raise ValidationError(f"--n-list must be ascending positive integers, got {n_list}")
    kernel = GaussianKernel(args.sigma)
    rng = rng_from_seed(args.seed)
    rows = []
    for n in n_list:
        X = rng.uniform(0.0, 1.0, size=(n, args.d))
        alpha = rng.standard_normal(n)
        op = fastsum_build(kernel, None, X, profile=args.profile)
        op.apply(alpha)  # warm-up, excludes one-time allocations from timing
        t_fast = []
        for _ in range(args.runs):
            t0 = time.perf_counter()
            fast = op.apply(alpha)
            t_fast.append(time.perf_counter() - t0)
        row = {"n": n, "t_fast": float(np.mean(t_fast))}
        if n <= SIZE_GUARD:
            t_direct = []
            for _ in range(args.runs):
                t0 = time.perf_counter()
                dense = direct_sum(kernel, X, X, alpha)
                t_direct.append(time.perf_counter() - t0)
            row["t_direct"] = float(np.mean(t_direct))
            row["rel_error"] = float(
                np.linalg.norm(fast - dense) / np.linalg.norm(dense)
            )
            row["direct_ran"] = True
        else:
            row["t_direct"] = None
            row["rel_error"] = None
            row["direct_ran"] = False
        rows.append(row)
        direct_txt = f"{row['t_direct']:.4f}s" if row["direct_ran"] else "skipped (size guard)"
        err_txt = f"{row['rel_error']:.3e}" if row["direct_ran"] else "-"
        print(f"N={n}: fast {row['t_fast']:.4f}s, direct {direct_txt}, rel_error {err_txt}")

    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "t_direct", "t_fast", "rel_error", "direct_ran"])
        for row in rows:
            writer.writerow(
                [
                    row["n"],
                    "" if row["t_direct"] is None else repr(row["t_direct"]),
                    repr(row["t_fast"]),
                    "" if row["rel_error"] is None else repr(row["rel_error"]),
                    row["direct_ran"],
                ]
            )
    _write_report(
        args.report_out,
        {
            "command": "bench-mvm",
            "config": {
                "d": args.d,
                "sigma": args.sigma,
                "profile": args.profile,
                "runs": args.runs,
            },
            "timings": {
                str(row["n"]): {"t_fast": row["t_fast"], "t_direct": row["t_direct"]}
                for row in rows
            },
            "mvm_relative_errors": {
                str(row["n"]): row["rel_error"] for row in rows if row["direct_ran"]
            },
            "seed": args.seed,
            "rng": RNG_NAME,
            "versions": {"nfftkrr": __version__},
        },
    )
    print(f"benchmark table written to {args.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nfftkrr",
        description="Matrix-free Gaussian ANOVA kernel ridge regression with NFFT fast summation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mis-rank", help="rank features by mutual information score")
    _add_data_flags(p)
    p.set_defaults(func=cmd_mis_rank)

    p = sub.add_parser("fit", help="train a model on a CSV file")
    _add_data_flags(p)
    p.add_argument("--sigma", type=float, default=1.0, help="Gaussian length scale")
    p.add_argument(
        "--gamma", type=float, default=None, help="alternative to --sigma: gamma = 1/sigma^2"
    )
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="ridge parameter")
    p.add_argument("--threshold", type=float, default=0.0, help="MIS threshold")
    p.add_argument("--profile", default="default", choices=["rough", "default", "fine"])
    p.add_argument("--tol", type=float, default=1e-3, help="CG relative residual tolerance")
    p.add_argument("--maxiter", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--model-out", required=True)
    p.add_argument("--report-out", default=None, help="write a JSON run report here")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict labels with a fitted model")
    p.add_argument("csv", help="input CSV file with a header row")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True, help="predictions CSV path")
    p.add_argument(
        "--label-column",
        default=None,
        help="optional: name of a label column present in the CSV (enables accuracy)",
    )
    p.add_argument("--positive-label", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--report-out", default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("gridsearch", help="grid search over (sigma, lambda)")
    _add_data_flags(p)
    p.add_argument(
        "--sigma-grid", type=_float_list, default=TABLE2_SIGMA,
        help="comma-separated sigma values (default: 1e-3..1e3, 7 values)",
    )
    p.add_argument(
        "--lambda-grid", type=_float_list, default=TABLE2_LAMBDA,
        help="comma-separated lambda values (default: 1,10,100,1000)",
    )
    p.add_argument("--threshold", type=float, default=0.0)
    p.add_argument("--profile", default="default", choices=["rough", "default", "fine"])
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--maxiter", type=int, default=1000)
    p.add_argument("--balance", action="store_true", help="undersample the majority class first")
    p.add_argument("--train-fraction", type=float, default=0.5)
    p.add_argument(
        "--no-shuffle-split", action="store_true",
        help="split by row order instead of a seeded shuffle",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None, help="grid cells run in this many threads")
    p.add_argument("--model-out", required=True)
    p.add_argument("--table-out", required=True, help="per-cell results CSV path")
    p.add_argument("--report-out", default=None)
    p.set_defaults(func=cmd_gridsearch)

    p = sub.add_parser("bench-mvm", help="benchmark fast vs dense kernel MVM")
    p.add_argument("--n-list", type=_int_list, required=True, help="ascending sample sizes")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--sigma", type=float, default=100.0)
    p.add_argument("--profile", default="default", choices=["rough", "default", "fine"])
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="benchmark CSV path")
    p.add_argument("--report-out", default=None)
    p.set_defaults(func=cmd_bench_mvm)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", None) is None and args.command == "gridsearch":
        import os

        args.threads = os.cpu_count() or 1
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
