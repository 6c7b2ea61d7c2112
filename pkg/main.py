"""Command-line entry point: estimate, predict, sweep, reproduce, variance."""

import argparse
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError

from config.config import default_solver_config, default_workers, setup_logging
from datasets import resolve
from schemas.errors import FnlseError
from schemas.schema import EstimatorKind, OutputTable
from sweep import parse_grid
from utils.reporting import FORMATS, render, write_csv
from utils.runners import ExperimentRunners

logger = logging.getLogger("fnlse.cli")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NOT_CONVERGED = 2

ESTIMATORS = ("mle", "lse", "loglse", "powlse")


class CliParser(argparse.ArgumentParser):
    """Usage errors exit with status 1; status 2 is reserved for non-convergence."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _alpha(text: str) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"invalid power index {text!r}") from None


def _grid(text: str):
    try:
        return parse_grid(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=FORMATS, default="human", help="output format")
    parser.add_argument("--root-tol", type=float, help="residual tolerance for convergence")
    parser.add_argument("--max-iter", type=int, help="Newton iteration cap")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR (logs go to stderr)")


def _dataset_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("dataset", nargs="?", help="ntds|jdm1|jdm2|jdm3|jdm4|att or a failure-time file")
    parser.add_argument("--dataset", dest="dataset_flag", metavar="DATASET", help="same as the positional argument")


def _estimator_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("estimator", choices=ESTIMATORS)
    parser.add_argument("--alpha", type=_alpha, help="power index for powlse, e.g. -5/4")


def _sweep_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--grid", type=_grid, help='comma-separated power indices, e.g. "-2,-7/4,1/4"')
    parser.add_argument("--workers", type=int, help="processes for the power-index sweep")


def build_parser() -> CliParser:
    parser = CliParser(prog="fnlse", description="Jelinski-Moranda estimation by MLE, LSE, LogLSE and powLSE")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)

    p = sub.add_parser("estimate", help="fit one estimator on a whole dataset")
    _dataset_args(p)
    _estimator_args(p)
    _common(p)

    p = sub.add_parser("predict", help="recursive one-step-ahead prediction")
    _dataset_args(p)
    _estimator_args(p)
    p.add_argument("--emit", type=Path, help="write the per-step series to this CSV file")
    _common(p)

    p = sub.add_parser("sweep", help="powLSE power-index sweep")
    _dataset_args(p)
    _sweep_args(p)
    p.add_argument("--emit", type=Path, help="write the per-index criteria to this CSV file")
    _common(p)

    p = sub.add_parser("reproduce", help="recompute the published RE and Braun tables")
    p.add_argument("--table", type=int, choices=(7, 8), help="only this table")
    p.add_argument("--emit", type=Path, help="directory for table and figure-series CSVs")
    _sweep_args(p)
    _common(p)

    p = sub.add_parser("variance", help="sample and residual variance by segment length")
    _dataset_args(p)
    _sweep_args(p)
    p.add_argument("--emit", type=Path, help="write the variance series to this CSV file")
    _common(p)
    return parser


def _kind(parser: CliParser, args: argparse.Namespace) -> EstimatorKind:
    if args.estimator == "powlse":
        if args.alpha is None:
            parser.error("powlse needs --alpha")
        return EstimatorKind.powlse(args.alpha)
    if args.alpha is not None:
        parser.error(f"--alpha only applies to powlse, not {args.estimator}")
    return EstimatorKind(method=args.estimator)


def _print(tables: Sequence[OutputTable], fmt: str) -> None:
    separator = "\n" if fmt == "human" else ""
    sys.stdout.write(separator.join(render(t, fmt) for t in tables))


def run(args: argparse.Namespace, parser: CliParser) -> int:
    cfg = default_solver_config(root_tol=args.root_tol, max_iter=args.max_iter)
    workers = getattr(args, "workers", None) or default_workers()
    grid = getattr(args, "grid", None)

    if args.command == "reproduce":
        tables = (args.table,) if args.table else (7, 8)
        _print(ExperimentRunners.reproduce(cfg, tables, grid=grid, workers=workers, emit=args.emit), args.format)
        return EXIT_OK

    ref = args.dataset_flag or args.dataset
    if ref is None:
        parser.error("a dataset is required")
    dataset = resolve(ref)

    if args.command == "estimate":
        result, table = ExperimentRunners.estimate(dataset, _kind(parser, args), cfg)
        _print([table], args.format)
        if not result.converged:
            logger.warning("estimation did not converge: %s", result.message)
            return EXIT_NOT_CONVERGED
        return EXIT_OK

    if args.command == "predict":
        run_, table = ExperimentRunners.predict(dataset, _kind(parser, args), cfg)
        _print([table], args.format)
        if args.emit:
            write_csv(ExperimentRunners.steps_table(run_), args.emit)
        return EXIT_OK

    if args.command == "sweep":
        _, table, optimum = ExperimentRunners.sweep(dataset, grid, cfg, workers)
        _print([table, optimum], args.format)
        if args.emit:
            write_csv(table, args.emit)
        return EXIT_OK

    table = ExperimentRunners.variance(dataset, cfg, grid, workers)
    _print([table], args.format)
    if args.emit:
        write_csv(table, args.emit)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        setup_logging(args.log_level)
        return run(args, parser)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    except (FnlseError, ValidationError, OSError, ValueError) as exc:
        logger.debug("input error", exc_info=True)
        print(f"fnlse: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
