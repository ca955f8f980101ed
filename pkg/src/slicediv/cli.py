"""Command-line entry point: ``slicediv compute`` and ``slicediv bench``.

Exit codes: 0 success, 1 failed verdict, 2 bad input or configuration,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings

import numpy as np

from . import experiments as ex
from .fulldim import (
    UnsupportedInputError,
    median_heuristic_kernel,
    mmd_nd,
    sinkhorn_divergence_terms_nd,
    wasserstein_exact,
)
from .measures import SortedSupport1D, load_measure, project
from .onedim import Kernel1D, cramer_1d, tv_1d, wasserstein_1d
from .sinkhorn import SinkhornConfig, SinkhornConvergenceWarning, SinkhornUnderflowError
from .slicing import BaseDivergenceSpec, ProjectionError, sliced_divergence, sliced_sinkhorn

EXIT_OK, EXIT_VERDICT, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

DIVERGENCES = ("w", "sw", "cramer", "scramer", "mmd", "smmd", "sinkhorn", "ssinkhorn", "tv", "stv", "w1d")
EXPERIMENTS = ("bound-check", "sample-complexity", "projection-complexity", "sinkhorn-iters", "two-sample")


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _default_workers() -> int:
    try:
        return max(len(os.sched_getaffinity(0)), 1)
    except AttributeError:
        return os.cpu_count() or 1


def _real_list(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _bandwidth(text):
    if text == "median":
        return text
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("bandwidth must be a positive number or 'median'")
    if not value > 0:
        raise argparse.ArgumentTypeError("bandwidth must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="slicediv", description="Sliced probability divergences.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("compute", help="divergence between two point files")
    c.add_argument("x", help="first sample (delimited numeric text, one row per point)")
    c.add_argument("y", help="second sample")
    c.add_argument("--div", choices=DIVERGENCES, default="sw")
    c.add_argument("--p", type=float, default=2.0)
    c.add_argument("--eps", type=float, default=1.0)
    c.add_argument("--L", type=int, default=100)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--kernel", choices=("linear", "rbf"), default="rbf")
    c.add_argument("--bandwidth", type=_bandwidth, default="median")
    c.add_argument("--variant", choices=("cost", "divergence"), default="cost",
                   help="ssinkhorn: average regularized costs or debiased divergences")
    c.add_argument("--tol", type=float, default=1e-6)
    c.add_argument("--max-iter", type=int, default=10_000)
    c.add_argument("--domain", choices=("auto", "standard", "log"), default="auto")
    c.add_argument("--workers", type=int, default=None)
    c.add_argument("--allow-partial", action="store_true",
                   help="report non-converged Sinkhorn results instead of failing")

    b = sub.add_parser("bench", help="run a named experiment")
    b.add_argument("experiment", choices=EXPERIMENTS)
    b.add_argument("--out", default="results")
    b.add_argument("--plots", action="store_true")
    b.add_argument("--quick", action="store_true")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--workers", type=int, default=None)
    b.add_argument("--replications", type=int)
    b.add_argument("--L", type=int)
    b.add_argument("--n", type=int)
    b.add_argument("--d", type=int)
    b.add_argument("--dims", type=_int_list)
    b.add_argument("--ns", type=_int_list)
    b.add_argument("--eps", type=float)
    b.add_argument("--eps-grid", type=_real_list)
    b.add_argument("--sigma-grid", type=_real_list)
    b.add_argument("--L-grid", type=_int_list)
    b.add_argument("--L-star", type=int)
    b.add_argument("--max-iter", type=int)
    b.add_argument("--tol", type=float)
    b.add_argument("--dataset")
    b.add_argument("--overlap", action="store_true")
    b.add_argument("--part", choices=("all", "sw", "ssinkhorn"), default="all",
                   help="sample-complexity: which divergence family to run")
    return parser


# ------------------------------------------------------------------ compute

def _tv_nd(X, Y):
    if X.d == 1:
        return tv_1d(SortedSupport1D.from_samples(X.points[:, 0], X.weights),
                     SortedSupport1D.from_samples(Y.points[:, 0], Y.weights))
    atoms, inverse = np.unique(np.concatenate([X.points, Y.points]), axis=0, return_inverse=True)
    mass = np.zeros(atoms.shape[0])
    np.add.at(mass, inverse.reshape(-1)[: X.n], X.weights)
    np.add.at(mass, inverse.reshape(-1)[X.n:], -Y.weights)
    return float(min(np.abs(mass).sum(), 2.0))


def _line_1d(X, Y, what):
    if X.d != 1:
        raise ConfigError(f"--div {what} needs one-dimensional data (got d={X.d})")
    axis = np.ones(1)
    return project(X, axis), project(Y, axis)


def _kernel(args, X, Y):
    if args.kernel == "linear":
        return Kernel1D("linear", None)
    if args.bandwidth == "median":
        return median_heuristic_kernel(X, Y)
    return Kernel1D("rbf", args.bandwidth)


def _compute(args) -> dict:
    X, Y = load_measure(args.x), load_measure(args.y)
    if X.d != Y.d:
        raise ConfigError(f"column counts differ: {X.d} vs {Y.d}")
    workers = args.workers or _default_workers()
    sk = SinkhornConfig(args.eps, args.tol, args.max_iter, args.p, args.domain)
    div = args.div
    sliced = dict(L=args.L, seed=args.seed, workers=workers)

    if div in ("sw", "scramer", "smmd", "stv"):
        kind = {"sw": "wasserstein", "scramer": "cramer", "smmd": "mmd", "stv": "tv"}[div]
        kernel = _kernel(args, X, Y) if div == "smmd" else None
        est = sliced_divergence(X, Y, BaseDivergenceSpec(kind, args.p, kernel=kernel), **sliced)
        return {"value": est.value, "std_error": est.std_error, "L": est.L}
    if div == "ssinkhorn":
        est = sliced_sinkhorn(X, Y, sk, variant=args.variant, **sliced)
        return {"value": est.value, "std_error": est.std_error, "L": est.L,
                "iterations": float(np.mean(est.iterations))}
    if div == "w":
        if X.d == 1:
            a, b = _line_1d(X, Y, div)
            return {"value": wasserstein_1d(a, b, args.p)}
        return {"value": wasserstein_exact(X, Y, args.p).cost}
    if div == "w1d":
        a, b = _line_1d(X, Y, div)
        return {"value": wasserstein_1d(a, b, args.p)}
    if div == "cramer":
        a, b = _line_1d(X, Y, div)
        return {"value": cramer_1d(a, b, args.p)}
    if div == "mmd":
        return {"value": mmd_nd(X, Y, _kernel(args, X, Y))}
    if div == "tv":
        return {"value": _tv_nd(X, Y)}
    value, cross = sinkhorn_divergence_terms_nd(X, Y, sk)
    return {"value": value, "cost": cross.regularized_objective, "iterations": cross.iterations}


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def cmd_compute(args, out=None) -> int:
    out = out or sys.stdout
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always" if args.allow_partial else "error", SinkhornConvergenceWarning)
        try:
            result = _compute(args)
        except ProjectionError as exc:
            if isinstance(exc.__cause__, SinkhornConvergenceWarning):
                print(f"error: projection {exc.index}: {exc.__cause__}", file=sys.stderr)
            else:
                print(f"error: {exc}", file=sys.stderr)
            return EXIT_NUMERIC if isinstance(exc.__cause__, (SinkhornConvergenceWarning, ArithmeticError)) \
                else EXIT_CONFIG
        except (SinkhornConvergenceWarning, SinkhornUnderflowError, FloatingPointError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        except (ConfigError, UnsupportedInputError, ValueError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    if any(issubclass(w.category, SinkhornConvergenceWarning) for w in caught):
        result["converged"] = "false"
    for key, value in result.items():
        print(f"{key}={_fmt(value)}", file=out)
    return EXIT_OK


# -------------------------------------------------------------------- bench

QUICK = {
    "bound-check": dict(n=200, sigma_grid=(0.5, 2.0, 4.0, 6.0, 9.0), L=25, replications=3),
    "sample-complexity-sw": dict(dims=(2, 10), ns=(50, 100, 200, 400), replications=10, L=50),
    "sample-complexity-ssinkhorn": dict(dims=(2, 10), ns=(50, 100, 200), replications=5, L=5,
                                        eps_grid=(1.0, 10.0)),
    "projection-complexity": dict(n=200, L_grid=(10, 30, 100, 300), L_star=3000, replications=10),
    "sinkhorn-iters": dict(dims=(2, 5, 10), n=60, L=20, replications=3),
    "two-sample": dict(ns=(50, 100, 200), replications=3),
}

FULL = {
    "bound-check": dict(n=500),
    "sample-complexity-sw": dict(dims=(2, 10, 50), ns=ex.DEFAULT_NS, replications=20, L=100),
    "sample-complexity-ssinkhorn": dict(dims=(2, 10, 50), ns=ex.DEFAULT_NS, replications=20, L=10,
                                        eps_grid=(0.05, 1.0, 10.0)),
    "projection-complexity": {},
    "sinkhorn-iters": {},
    "two-sample": {},
}


def _overrides(args, allowed):
    mapping = {
        "replications": args.replications, "L": args.L, "n": args.n, "d": args.d, "dims": args.dims,
        "ns": args.ns, "sigma_grid": args.sigma_grid, "L_grid": args.L_grid, "L_star": args.L_star,
        "eps_grid": args.eps_grid, "max_iterations": args.max_iter, "tolerance": args.tol,
    }
    if args.eps is not None:
        mapping["epsilon"] = args.eps
        mapping["base_epsilon"] = args.eps
    return {k: v for k, v in mapping.items() if v is not None and k in allowed}


def _params(args, key, allowed):
    preset = (QUICK if args.quick else FULL)[key]
    return {**preset, **_overrides(args, allowed)}


def _run_bench(args, workers) -> ex.ExperimentReport:
    common = dict(seed=args.seed, workers=workers)
    name = args.experiment
    if name == "bound-check":
        allowed = {"n", "d", "sigma_grid", "L", "replications", "epsilon"}
        return ex.run_bound_check(**_params(args, name, allowed), **common)
    if name == "projection-complexity":
        allowed = {"dims", "n", "L_grid", "L_star", "replications"}
        return ex.run_projection_complexity(**_params(args, name, allowed), **common)
    if name == "sinkhorn-iters":
        allowed = {"dims", "n", "epsilon", "L", "replications", "max_iterations", "tolerance"}
        return ex.run_sinkhorn_iters(**_params(args, name, allowed), **common)
    if name == "two-sample":
        allowed = {"ns", "L", "epsilon", "replications"}
        return ex.run_two_sample(dataset=args.dataset, overlap=args.overlap,
                                 **_params(args, name, allowed), **common)
    allowed = {"dims", "ns", "replications", "L", "eps_grid", "base_epsilon"}
    parts = []
    if args.part in ("all", "sw"):
        parts.append(ex.run_sample_complexity(
            ("sw2", "w2"), name="sample-complexity-sw",
            **_params(args, "sample-complexity-sw", allowed), **common))
    if args.part in ("all", "ssinkhorn"):
        parts.append(ex.run_sample_complexity(
            ("ssinkhorn",), name="sample-complexity-ssinkhorn",
            **_params(args, "sample-complexity-ssinkhorn", allowed), **common))
    return ex.merge_reports("sample-complexity", parts)


def cmd_bench(args, out=None) -> int:
    out = out or sys.stdout
    workers = args.workers or _default_workers()
    if workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SinkhornConvergenceWarning)
        try:
            report = _run_bench(args, workers)
        except (ConfigError, UnsupportedInputError, ValueError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except (ProjectionError, FloatingPointError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
    for path in report.write(args.out, plots=args.plots):
        print(f"wrote={path}", file=out)
    for verdict in report.verdicts:
        print(verdict.line(), file=out)
    return EXIT_OK if report.passed else EXIT_VERDICT


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "compute":
        if args.L < 1 or args.max_iter < 1 or (args.workers is not None and args.workers < 1):
            print("error: --L, --max-iter and --workers must be >= 1", file=sys.stderr)
            return EXIT_CONFIG
        return cmd_compute(args)
    return cmd_bench(args)


if __name__ == "__main__":
    sys.exit(main())
