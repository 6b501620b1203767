"""Command-line front end: ``mixlab check``, ``mixlab pipeline``,
``mixlab plot``.

Exit codes: 0 = all selected checks passed (indeterminate verdicts are
flagged in the report but do not fail the run), 1 = at least one check
failed, 2 = usage or input error.

Reports are byte-reproducible for a given config + seed, including under
different ``--workers`` values: every checker derives its own named random
stream from the root seed, assembly order is fixed by check id, and BLAS
thread pools are pinned to one thread below (deterministic reductions).
Wall-clock timing goes to stderr only.
"""

from __future__ import annotations

import os

for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS",
             "NUMEXPR_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import argparse  # noqa: E402
import sys  # noqa: E402
import time  # noqa: E402
from concurrent.futures import ProcessPoolExecutor  # noqa: E402

from .checks import SUITE_IDS, CheckParams, run_check  # noqa: E402
from .generators import parse_gen_spec  # noqa: E402
from .model import IsingModel  # noqa: E402
from .modelio import ModelFormatError, parse_model  # noqa: E402
from .pipeline import PipelineParams, lower_bound_pipeline  # noqa: E402
from .report import build_report, write_report, write_series_csv  # noqa: E402
from .rng import RngStream  # noqa: E402

__all__ = ["load_model", "main", "run_check_suite"]


def load_model(source: str, seed: int = 0) -> IsingModel:
    """Model from a file path or a ``gen:`` spec."""
    if source.startswith("gen:"):
        return parse_gen_spec(source, RngStream(seed))
    return parse_model(source)


def _pin_threads() -> None:
    for var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(var, "1")


def _run_one(args):
    check_id, model, params, seed = args
    return run_check(check_id, model, params, seed)


def run_check_suite(model: IsingModel, ids, params: CheckParams, seed: int,
                    workers: int = 1):
    """Run the selected checkers; results come back in suite order no
    matter how execution interleaves."""
    tasks = [(check_id, model, params, seed) for check_id in ids]
    if workers <= 1:
        return [_run_one(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers,
                             initializer=_pin_threads) as pool:
        return list(pool.map(_run_one, tasks))


def _parse_suite(arg: str):
    if arg == "all":
        return list(SUITE_IDS)
    ids = [s.strip() for s in arg.split(",") if s.strip()]
    if not ids:
        raise ValueError("empty suite selection")
    unknown = [s for s in ids if s not in SUITE_IDS]
    if unknown:
        raise ValueError(
            f"unknown check ids: {', '.join(unknown)}; "
            f"known: {', '.join(SUITE_IDS)}"
        )
    return ids


def _check_seed(seed: int) -> int:
    if not 0 <= seed < 2 ** 64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixlab",
        description="exact and Monte-Carlo certification for heat-bath "
                    "Ising dynamics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", required=True,
                        help="model file path or gen:<kind>:k=v,... spec")
    common.add_argument("--seed", type=int, default=0,
                        help="root seed (unsigned 64-bit)")
    common.add_argument("--out", required=True, help="report output path")
    common.add_argument("--replicas", type=int, default=1000)
    common.add_argument("--k", type=int, default=None,
                        help="tracked-subset size override")
    common.add_argument("--tv-threshold", type=float, default=0.25)
    common.add_argument("--enum-limit", type=int, default=12)
    common.add_argument("--matrix-limit", type=int, default=12)
    common.add_argument("--confidence", type=float, default=0.99)

    p_check = sub.add_parser("check", parents=[common],
                             help="run inequality checkers")
    p_check.add_argument("--suite", default="all",
                         help="comma-separated check ids, or 'all'")
    p_check.add_argument("--horizon", type=int, default=None,
                         help="simulation horizon override")
    p_check.add_argument("--workers", type=int, default=1,
                         help="parallel worker processes across checkers")

    p_pipe = sub.add_parser("pipeline", parents=[common],
                            help="run the lower-bound pipeline")
    p_pipe.add_argument("--c-time", type=float, default=0.15,
                        help="horizon coefficient: T = floor(c * n * ln n)")
    p_pipe.add_argument("--target-time", type=int, default=None,
                        help="explicit horizon T override")
    p_pipe.add_argument("--tail-budget", type=float, default=1e-4)
    p_pipe.add_argument("--stationary-samples", type=int, default=None)
    p_pipe.add_argument("--asymptotic-constants", action="store_true",
                        help="use the asymptotic T/T0 forms (vacuous at "
                             "small n; constants are echoed)")

    p_plot = sub.add_parser("plot", help="extract a series to CSV")
    p_plot.add_argument("--report", required=True)
    p_plot.add_argument("--series", required=True)
    p_plot.add_argument("--out", required=True)
    return parser


def _cmd_check(args) -> int:
    seed = _check_seed(args.seed)
    ids = _parse_suite(args.suite)
    model = load_model(args.model, seed)
    params = CheckParams(
        replicas=args.replicas, k=args.k, tv_threshold=args.tv_threshold,
        enum_limit=args.enum_limit, matrix_limit=args.matrix_limit,
        horizon=args.horizon, confidence=args.confidence,
    )
    t0 = time.perf_counter()
    reports = run_check_suite(model, ids, params, seed, workers=args.workers)
    elapsed = time.perf_counter() - t0
    config = {
        "command": "check", "model": args.model, "suite": ids, "seed": seed,
        "replicas": args.replicas, "k": args.k,
        "tv_threshold": args.tv_threshold, "enum_limit": args.enum_limit,
        "matrix_limit": args.matrix_limit, "horizon": args.horizon,
        "confidence": args.confidence,
    }
    report = build_report(config, checks=reports)
    write_report(report, args.out)
    n_fail = report["summary"]["n_fail"]
    n_ind = report["summary"]["n_indeterminate"]
    print(f"wrote {args.out} in {elapsed:.2f}s "
          f"({report['summary']['n_pass']} pass, {n_fail} fail, "
          f"{n_ind} indeterminate)", file=sys.stderr)
    return 1 if n_fail else 0


def _cmd_pipeline(args) -> int:
    seed = _check_seed(args.seed)
    model = load_model(args.model, seed)
    params = PipelineParams(
        k=args.k, c_time=args.c_time, target_time=args.target_time,
        replicas=args.replicas, stationary_samples=args.stationary_samples,
        confidence=args.confidence, tv_threshold=args.tv_threshold,
        tail_budget=args.tail_budget, enum_limit=args.enum_limit,
        matrix_limit=args.matrix_limit,
        use_asymptotic_constants=args.asymptotic_constants,
    )
    t0 = time.perf_counter()
    result = lower_bound_pipeline(model, params, seed=seed)
    elapsed = time.perf_counter() - t0
    config = {
        "command": "pipeline", "model": args.model, "seed": seed,
        "k": args.k, "c_time": args.c_time, "target_time": args.target_time,
        "replicas": args.replicas,
        "stationary_samples": args.stationary_samples,
        "confidence": args.confidence, "tv_threshold": args.tv_threshold,
        "tail_budget": args.tail_budget, "enum_limit": args.enum_limit,
        "matrix_limit": args.matrix_limit,
        "asymptotic_constants": args.asymptotic_constants,
    }
    report = build_report(config, pipeline=result)
    write_report(report, args.out)
    state = ("degenerate" if result.degenerate
             else "inconclusive" if result.inconclusive
             else f"certified > {result.certified_lower_bound:g}"
             if result.strict else
             f"certified >= {result.certified_lower_bound:g}")
    print(f"wrote {args.out} in {elapsed:.2f}s "
          f"(branch={result.branch}, {state})", file=sys.stderr)
    return 0


def _cmd_plot(args) -> int:
    import json
    with open(args.report, encoding="utf-8") as fh:
        report = json.load(fh)
    write_series_csv(report, args.series, args.out)
    print(f"wrote {args.out}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else int(bool(exc.code))
    try:
        if args.command == "check":
            return _cmd_check(args)
        if args.command == "pipeline":
            return _cmd_pipeline(args)
        if args.command == "plot":
            return _cmd_plot(args)
        raise AssertionError(args.command)
    except (ValueError, KeyError, ModelFormatError, OSError) as exc:
        if isinstance(exc, OSError):
            msg = str(exc)
        else:
            msg = exc.args[0] if exc.args else str(exc)
        print(f"error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
