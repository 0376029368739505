"""Command-line front end: train, evaluate, sweep, noise-curve, certify.

Outputs are UTF-8 CSV (or the documented JSON model format). Every CSV file
starts with a version/meta record (first field "# gaussrobust-csv v1 ..."),
padded to the header's field count so strict RFC-4180 readers accept it; the
invoking flags are echoed there so runs can be reproduced.

Exit codes: 0 success, 1 data or runtime errors, 2 flag errors (with usage).
The certify command additionally exits 1 when the duality gap exceeds the
threshold.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from .certify import build_certificate
from .data import (
    DataFormatError,
    Dataset,
    SplitSpec,
    TOY_KINDS,
    gen_gaussian_toy,
    load_libsvm,
    split_dataset,
)
from .experiments import (
    ALGORITHMS,
    SweepSpec,
    accuracy,
    run_noise_curve,
    run_sweep,
    train_algorithm,
)
from .kernels import KernelKind, KernelModel, KernelSpec
from .linear import TrainConfig, batch_refine, train_baseline_svm, train_guru
from .multiclass import train_m_guru, train_m_guru_s2
from .robust import LinearModel, MulticlassModel
from .serialize import ModelFormatError, load_model, save_model

__all__ = ["main", "console_main"]

CSV_VERSION = "v1"
WORKERS_ENV = "GAUSSROBUST_WORKERS"


def _write_csv(path, header: list[str], rows, argv: list[str]) -> None:
    meta = [f"# gaussrobust-csv {CSV_VERSION} cmd: gaussrobust {' '.join(argv)}"]
    meta += [""] * (len(header) - 1)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(meta)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _resolve_data(args) -> tuple[Dataset, Dataset, Dataset]:
    """--data is either toy:<kind> (generated) or a LIBSVM path (split 3 ways)."""
    spec = args.data
    if spec.startswith("toy:"):
        kind = spec[len("toy:") :]
        if kind not in TOY_KINDS:
            raise DataFormatError(f"unknown toy dataset {kind!r}; choose from {TOY_KINDS}")
        return gen_gaussian_toy(kind, args.toy_n, args.toy_seed)
    data = load_libsvm(spec)
    fracs = [float(f) for f in args.split_fracs.split(",")]
    if len(fracs) != 3:
        raise DataFormatError("--split-fracs needs three comma-separated fractions")
    return split_dataset(data, SplitSpec(*fracs, seed=args.split_seed))


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="toy:<kind> or a LIBSVM file path")
    p.add_argument("--toy-n", type=int, default=200, help="samples per split for toy data")
    p.add_argument("--toy-seed", type=int, default=7, help="generator seed for toy data")
    p.add_argument("--split-fracs", default="0.34,0.33,0.33", help="train,cv,test fractions")
    p.add_argument("--split-seed", type=int, default=0, help="shuffle seed for file splits")


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sigma", type=float, default=0.5, help="noise scale (beta = sigma^2)")
    p.add_argument("--lambda", dest="lam", type=float, default=0.1, help="L2 tradeoff for svm/asvc")
    p.add_argument("--delta", type=float, default=0.1, help="displacement radius for asvc")
    p.add_argument("--rounds", type=int, default=8, help="alternation rounds for asvc")
    p.add_argument("--eta0", type=float, default=0.5, help="initial learning rate")
    p.add_argument("--epsilon", type=float, default=1e-4, help="relative stopping tolerance")
    p.add_argument("--max-iters", type=int, default=20000)
    p.add_argument("--eval-period", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0, help="SGD sampling seed")
    p.add_argument("--kernel", choices=["linear", "poly", "rbf"], default="linear")
    p.add_argument("--degree", type=int, default=2, help="polynomial kernel degree")
    p.add_argument("--offset", type=float, default=1.0, help="polynomial kernel offset")
    p.add_argument("--gamma", type=float, default=1.0, help="rbf kernel width")


def _validate_train_flags(parser: argparse.ArgumentParser, args) -> None:
    if args.sigma <= 0.0:
        parser.error("sigma must be positive")
    if args.lam <= 0.0:
        parser.error("lambda must be positive")
    if args.delta < 0.0:
        parser.error("delta must be nonnegative")
    if args.eta0 <= 0.0:
        parser.error("eta0 must be positive")
    if args.epsilon <= 0.0:
        parser.error("epsilon must be positive")
    if args.max_iters < 1:
        parser.error("max-iters must be at least 1")
    if args.eval_period < 1:
        parser.error("eval-period must be at least 1")


def _config(args) -> TrainConfig:
    return TrainConfig(
        eta0=args.eta0,
        epsilon=args.epsilon,
        max_iters=args.max_iters,
        seed=args.seed,
        eval_period=args.eval_period,
    )


def _kernel_spec(args) -> KernelSpec:
    if args.kernel == "poly":
        return KernelSpec(KernelKind.POLYNOMIAL, degree=args.degree, offset=args.offset)
    if args.kernel == "rbf":
        return KernelSpec(KernelKind.RBF, gamma=args.gamma)
    return KernelSpec(KernelKind.LINEAR)


def _cmd_train(parser, args, argv) -> int:
    _validate_train_flags(parser, args)
    train, _cv, _test = _resolve_data(args)
    cfg = _config(args)
    algo = args.algo
    trace: list[tuple[int, float]]
    if algo == "guru":
        report = train_guru(train, args.sigma, cfg)
        model, trace = report.final_model, list(report.objective_trace)
    elif algo == "svm":
        report = train_baseline_svm(train, args.lam, cfg)
        model, trace = report.final_model, list(report.objective_trace)
    elif algo == "m-guru":
        report = train_m_guru(train, args.sigma, cfg)
        model, trace = report.final_model, list(report.objective_trace)
    elif algo == "m-guru-s2":
        report = train_m_guru_s2(train, args.sigma, cfg)
        model, trace = report.final_model, list(report.objective_trace)
    else:
        model = train_algorithm(
            algo,
            train,
            cfg,
            sigma=args.sigma,
            lam=args.lam,
            delta=args.delta,
            rounds=args.rounds,
            kernel=_kernel_spec(args),
        )
        trace = []
    save_model(model, args.out)
    report_path = args.report or f"{args.out}.report.csv"
    _write_csv(
        report_path,
        ["iteration", "objective"],
        [(it, repr(obj)) for it, obj in trace],
        argv,
    )
    print(f"wrote {args.out} and {report_path}")
    return 0


def _cmd_evaluate(parser, args, argv) -> int:
    model = load_model(args.model)
    splits = dict(zip(("train", "cv", "test"), _resolve_data(args)))
    acc = accuracy(model, splits[args.split])
    print(f"{args.split} accuracy: {acc:.4f}")
    return 0


def _cmd_sweep(parser, args, argv) -> int:
    _validate_train_flags(parser, args)
    if args.base <= 1.0:
        parser.error("base must exceed 1")
    if args.min_exp > args.max_exp:
        parser.error("min-exp must not exceed max-exp")
    train, cv, test = _resolve_data(args)
    spec = SweepSpec(args.param, args.base, args.min_exp, args.max_exp)
    result = run_sweep(
        args.algo,
        spec,
        train,
        cv,
        test,
        _config(args),
        sigma=args.sigma,
        lam=args.lam,
        delta=args.delta,
        rounds=args.rounds,
        kernel=_kernel_spec(args),
        workers=args.workers,
    )
    rows = [
        (
            repr(r.parameter),
            repr(r.cv_accuracy),
            "" if r.test_accuracy is None else repr(r.test_accuracy),
            repr(r.final_norm),
        )
        for r in result.rows
    ]
    _write_csv(args.out, [args.param, "cv_accuracy", "test_accuracy", "final_norm"], rows, argv)
    print(
        f"selected {args.param}={result.selected_parameter:g} "
        f"with test accuracy {result.selected_test_accuracy:.4f}; wrote {args.out}"
    )
    return 0


def _cmd_noise_curve(parser, args, argv) -> int:
    if args.repeats < 1:
        parser.error("repeats must be at least 1")
    try:
        magnitudes = [float(v) for v in args.magnitudes.split(",") if v != ""]
    except ValueError:
        parser.error("magnitudes must be a comma-separated list of numbers")
    if any(m < 0 for m in magnitudes):
        parser.error("noise magnitudes must be nonnegative")
    models = {path: load_model(path) for path in args.model}
    _train, cv, test = _resolve_data(args)
    rows = run_noise_curve(
        models,
        {"cv": cv, "test": test},
        magnitudes,
        repeats=args.repeats,
        seed=args.seed,
        workers=args.workers,
    )
    _write_csv(
        args.out,
        ["model", "split", "magnitude", "mean_accuracy", "std_accuracy"],
        [
            (r.model_name, r.split, repr(r.magnitude), repr(r.mean_accuracy), repr(r.std_accuracy))
            for r in rows
        ],
        argv,
    )
    print(f"wrote {args.out}")
    return 0


def _cmd_certify(parser, args, argv) -> int:
    if args.sigma <= 0.0:
        parser.error("sigma must be positive")
    model = load_model(args.model)
    if isinstance(model, (KernelModel, MulticlassModel)):
        parser.error("certification supports linear binary models")
    train, _cv, _test = _resolve_data(args)
    refined = batch_refine(
        train, args.sigma, LinearModel(model.w, args.sigma), grad_tol=args.grad_tol
    )
    cert = build_certificate(train, refined.model)
    lines = [
        "gaussrobust-certificate v1",
        f"cmd: gaussrobust {' '.join(argv)}",
        f"grad_tol: {args.grad_tol!r}  achieved_grad_norm: {cert.grad_norm!r}  refined: {refined.converged}",
        f"sigma: {cert.sigma!r}  w_norm: {cert.w_norm!r}",
        f"primal_objective: {cert.primal_objective!r}",
        f"dual_objective: {cert.dual_objective!r}",
        f"gap_rel: {cert.gap_rel!r}",
        f"constraint_lhs: {cert.constraint_lhs!r}  constraint_rhs: {cert.constraint_rhs!r}"
        f"  tight_rel: {cert.tight_rel!r}  feasible: {cert.feasible}",
        "sample,alpha,norm_estimate,valid,clamped",
    ]
    for i in range(len(cert.alphas)):
        est = cert.norm_estimates[i]
        lines.append(
            f"{i},{cert.alphas[i]!r},{'' if np.isnan(est) else repr(est)},"
            f"{int(cert.estimate_valid[i])},{int(cert.clamped[i])}"
        )
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    ok = cert.gap_rel < args.gap_threshold
    print(
        f"gap_rel={cert.gap_rel:.3e} ({'pass' if ok else 'FAIL'} at threshold "
        f"{args.gap_threshold:g}); wrote {args.out}"
    )
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaussrobust",
        description="Robust classification under worst-case Gaussian perturbations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a model and write it to disk")
    p_train.add_argument("--algo", choices=ALGORITHMS, required=True)
    _add_data_flags(p_train)
    _add_train_flags(p_train)
    p_train.add_argument("--out", required=True, help="model output path")
    p_train.add_argument("--report", default=None, help="report CSV path (default <out>.report.csv)")
    p_train.set_defaults(func=_cmd_train)

    p_eval = sub.add_parser("evaluate", help="accuracy of a stored model on one split")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--split", choices=["train", "cv", "test"], default="test")
    _add_data_flags(p_eval)
    p_eval.set_defaults(func=_cmd_evaluate)

    p_sweep = sub.add_parser("sweep", help="geometric grid sweep with cv selection")
    p_sweep.add_argument("--algo", choices=ALGORITHMS, required=True)
    p_sweep.add_argument("--param", choices=["sigma", "lambda", "eta0"], required=True)
    p_sweep.add_argument("--base", type=float, default=2.0)
    p_sweep.add_argument("--min-exp", type=int, default=-6)
    p_sweep.add_argument("--max-exp", type=int, default=6)
    p_sweep.add_argument("--workers", type=int, default=_default_workers())
    _add_data_flags(p_sweep)
    _add_train_flags(p_sweep)
    p_sweep.add_argument("--out", required=True, help="sweep CSV path")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_noise = sub.add_parser("noise-curve", help="accuracy under uniform feature noise")
    p_noise.add_argument("--model", action="append", required=True, help="model file (repeatable)")
    p_noise.add_argument("--magnitudes", default="0,0.25,0.5,1.0")
    p_noise.add_argument("--repeats", type=int, default=20)
    p_noise.add_argument("--seed", type=int, default=0)
    p_noise.add_argument("--workers", type=int, default=_default_workers())
    _add_data_flags(p_noise)
    p_noise.add_argument("--out", required=True, help="noise CSV path")
    p_noise.set_defaults(func=_cmd_noise_curve)

    p_cert = sub.add_parser("certify", help="refine a linear model and check duality")
    p_cert.add_argument("--model", required=True)
    p_cert.add_argument("--sigma", type=float, required=True)
    p_cert.add_argument("--grad-tol", type=float, default=1e-8)
    p_cert.add_argument("--gap-threshold", type=float, default=1e-3)
    _add_data_flags(p_cert)
    p_cert.add_argument("--out", required=True, help="certificate report path")
    p_cert.set_defaults(func=_cmd_certify)

    return parser


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(parser, args, argv)
    except (DataFormatError, ModelFormatError, OSError, FloatingPointError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def console_main() -> None:
    raise SystemExit(main())
