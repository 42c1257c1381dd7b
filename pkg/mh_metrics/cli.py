"""Command-line front end: analyze, viz, simulate, truevalue."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import voluptuous as vol

from . import __version__
from .analysis.simulation import SimulationScenario
from .config import SCENARIO_SCHEMA, load_style
from .const import (
    CONF_CI_LEVEL,
    CONF_CUTOFFS,
    CONF_D,
    CONF_N,
    CONF_RHO,
    CONF_SEED,
    CONF_TRIALS,
    DEFAULT_ALPHA,
    DEFAULT_CI_LEVEL,
    DEFAULT_CUTOFFS,
    DEFAULT_RHO,
    DEFAULT_TRIALS,
    DEFAULT_WORKERS,
    ESTIMATOR_AUTO,
    ESTIMATORS,
    EXIT_INPUT_ERROR,
    EXIT_IO_ERROR,
    EXIT_MEASURE_UNDEFINED,
    EXIT_OK,
    EXIT_UNEXPECTED,
    FULL_GRID_D,
    FULL_GRID_N,
    FULL_TRIALS,
    SCHEMA_VERSION,
)
from .coordinator import AnalysisCoordinator, results_frame
from .exceptions import (
    InvalidParameterError,
    MeasureUndefinedError,
    MHMetricsError,
    TableFormatError,
)
from .helpers import resolve_seed

_LOGGER = logging.getLogger(__name__)

RANGE_TOLERANCE = 1e-9


def parse_grid(text: str) -> list[float]:
    """Parse ``0,0.5,1`` or ``a:b:step`` (both ends inclusive) or a mix of them."""
    values: list[float] = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            raise InvalidParameterError(f"empty item in grid {text!r}")
        if ":" not in item:
            values.append(_to_float(item))
            continue
        parts = item.split(":")
        if len(parts) != 3:
            raise InvalidParameterError(f"range must be start:stop:step, got {item!r}")
        start, stop, step = (_to_float(part) for part in parts)
        if step <= 0 or stop < start:
            raise InvalidParameterError(f"invalid range {item!r}")
        count = math.floor((stop - start) / step + RANGE_TOLERANCE)
        values.extend(round(start + k * step, 12) for k in range(count + 1))
    return values


def parse_int_list(text: str) -> list[int]:
    values = parse_grid(text)
    if any(v != int(v) for v in values):
        raise InvalidParameterError(f"expected integers, got {text!r}")
    return [int(v) for v in values]


def _to_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError as err:
        raise InvalidParameterError(f"not a number: {text!r}") from err
    if not math.isfinite(value):
        raise InvalidParameterError(f"not a finite number: {text!r}")
    return value


def _read_input(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        return Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as err:
        raise TableFormatError("input is not UTF-8 text") from err


def _write_output(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    Path(out).write_text(text, encoding="utf-8")
    _LOGGER.info("Wrote %s", out)


def _dump(data) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def cmd_analyze(args: argparse.Namespace) -> int:
    coordinator = AnalysisCoordinator(
        {
            "estimator": args.estimator,
            "alpha": args.alpha,
            "ci_level": args.ci,
            "clip": args.clip_ci,
            "lambdas": args.lambdas,
        }
    )
    report = coordinator.analyze(_read_input(args.table), probs=args.probs, n=args.n)
    _write_output(_dump(report.to_dict()), args.out)
    return EXIT_OK


def cmd_viz(args: argparse.Namespace) -> int:
    style = load_style(args.style)
    coordinator = AnalysisCoordinator({"estimator": args.estimator, "alpha": args.alpha})
    svg = coordinator.visualize(
        _read_input(args.table), probs=args.probs, style=style, title=args.title
    )
    Path(args.output).write_bytes(svg)
    _LOGGER.info("Wrote %s (%d bytes)", args.output, len(svg))
    return EXIT_OK


def _scenarios(args: argparse.Namespace) -> list[SimulationScenario]:
    if args.full_grid:
        d_values, n_values = list(FULL_GRID_D), list(FULL_GRID_N)
        trials = args.trials if args.trials is not None else FULL_TRIALS
    else:
        if args.d is None or args.n is None:
            raise InvalidParameterError("--d and --n are required unless --full-grid is given")
        d_values, n_values = parse_grid(args.d), parse_int_list(args.n)
        trials = args.trials if args.trials is not None else DEFAULT_TRIALS
    cutoffs = parse_grid(args.cutoffs)
    seed = resolve_seed(args.seed)

    scenarios = []
    for d in d_values:
        for n in n_values:
            conf = SCENARIO_SCHEMA(
                {
                    CONF_D: d,
                    CONF_N: n,
                    CONF_RHO: args.rho,
                    CONF_CUTOFFS: cutoffs,
                    CONF_TRIALS: trials,
                    CONF_SEED: seed,
                    CONF_CI_LEVEL: args.ci,
                }
            )
            scenarios.append(SimulationScenario.from_dict(conf))
    return scenarios


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.workers < 1:
        raise InvalidParameterError(f"--workers must be ≥ 1, got {args.workers}")
    results = AnalysisCoordinator.simulate(_scenarios(args), workers=args.workers)
    if args.format == "csv":
        text = results_frame(results).to_csv(index=False)
    else:
        text = _dump(
            {
                "schemaVersion": SCHEMA_VERSION,
                "results": [result.to_dict() for result in results],
            }
        )
    _write_output(text, args.out)
    return EXIT_OK


def cmd_truevalue(args: argparse.Namespace) -> int:
    value = AnalysisCoordinator.true_value(args.d, args.rho, parse_grid(args.cutoffs))
    sys.stdout.write(f"{value:.10f}\n")
    return EXIT_OK


def _lambda(text: str) -> float:
    value = _to_float(text)
    if value <= -1.0:
        raise argparse.ArgumentTypeError(f"lambda must be > -1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mh-metrics",
        description="Degree and direction of departure from marginal homogeneity "
        "in square ordinal contingency tables.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_estimator(p: argparse.ArgumentParser) -> None:
        p.add_argument("--estimator", choices=ESTIMATORS, default=ESTIMATOR_AUTO)
        p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA,
                       help="Dirichlet prior parameter for Bayes smoothing")
        p.add_argument("--probs", action="store_true",
                       help="input holds cell probabilities instead of counts")

    analyze = sub.add_parser("analyze", help="measures and confidence interval as JSON")
    analyze.add_argument("table", help="CSV file of counts ('-' for stdin)")
    add_estimator(analyze)
    analyze.add_argument("--lambda", dest="lambdas", type=_lambda, action="append",
                         metavar="V", help="power-divergence parameter (repeatable)")
    analyze.add_argument("--ci", type=float, default=DEFAULT_CI_LEVEL)
    analyze.add_argument("--clip-ci", action="store_true", help="clip bounds to [0, 1]")
    analyze.add_argument("--n", type=int, default=None,
                         help="sample size for probability input")
    analyze.add_argument("--out", default=None)
    analyze.set_defaults(func=cmd_analyze)

    viz = sub.add_parser("viz", help="render the sub-measure figure as SVG")
    viz.add_argument("table")
    viz.add_argument("-o", "--output", required=True)
    add_estimator(viz)
    viz.add_argument("--style", default=None, help="JSON/YAML style overrides")
    viz.add_argument("--title", default=None)
    viz.set_defaults(func=cmd_viz)

    simulate = sub.add_parser("simulate", help="Monte Carlo coverage of the interval")
    simulate.add_argument("--d", default=None, help="list or start:stop:step")
    simulate.add_argument("--n", default=None, help="list of sample sizes")
    simulate.add_argument("--rho", type=float, default=DEFAULT_RHO)
    simulate.add_argument("--cutoffs", default=",".join(str(c) for c in DEFAULT_CUTOFFS))
    simulate.add_argument("--trials", type=int, default=None)
    simulate.add_argument("--seed", type=int, default=None)
    simulate.add_argument("--workers", type=int, default=DEFAULT_WORKERS)
    simulate.add_argument("--ci", type=float, default=DEFAULT_CI_LEVEL)
    simulate.add_argument("--full-grid", action="store_true",
                          help="d = 0…4 by 0.25, n = 36, 180, 360, 3600, 100,000 trials")
    simulate.add_argument("--format", choices=["json", "csv"], default="json")
    simulate.add_argument("--out", default=None)
    simulate.set_defaults(func=cmd_simulate)

    truevalue = sub.add_parser("truevalue", help="Γ of the discretized bivariate normal")
    truevalue.add_argument("--d", type=float, required=True)
    truevalue.add_argument("--rho", type=float, default=DEFAULT_RHO)
    truevalue.add_argument("--cutoffs", default=",".join(str(c) for c in DEFAULT_CUTOFFS))
    truevalue.set_defaults(func=cmd_truevalue)
    return parser


def _setup_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )


def _fail(message: str, code: int) -> int:
    sys.stderr.write(f"mh-metrics: {message}\n")
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)

    try:
        return args.func(args)
    except MeasureUndefinedError as err:
        return _fail(str(err), EXIT_MEASURE_UNDEFINED)
    except (MHMetricsError, vol.Invalid) as err:
        return _fail(str(err), EXIT_INPUT_ERROR)
    except OSError as err:
        return _fail(str(err), EXIT_IO_ERROR)
    except Exception:
        _LOGGER.exception("Unexpected error")
        return _fail("unexpected error (run with -vv for details)", EXIT_UNEXPECTED)
