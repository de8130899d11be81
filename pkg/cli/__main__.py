from __future__ import annotations

import argparse
import logging
from pathlib import Path

from cli.commands import (
    EXIT_CONFIG,
    bound_curve_command,
    evaluate_command,
    optimize_command,
    reproduce_table_command,
    run_guarded,
    search_ratio_command,
    verify_gsp_command,
    verify_sp_command,
    witnesses_command,
)
from core.config import SearchConfig, default_node_budget
from objectives.evaluate import Convention
from reports.exporter import ReportFormat

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _add_output(parser: argparse.ArgumentParser, default: ReportFormat) -> None:
    parser.add_argument("-o", "--output", help="Report path (stdout when omitted)")
    parser.add_argument(
        "--format",
        choices=[fmt.value for fmt in ReportFormat],
        default=default.value,
        help=f"Report format (default {default.value})",
    )


def _add_search(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n-min", type=int, default=2, help="Smallest number of agents")
    parser.add_argument("--n-max", type=int, default=2, help="Largest number of agents")
    parser.add_argument("--grid-step", type=float, default=1e-3, help="Exhaustive grid step")
    parser.add_argument("--restarts", type=int, default=0, help="Random profiles per n")
    parser.add_argument("--seed", type=int, required=True, help="Seed for random restarts")
    parser.add_argument("--budget", type=int, help="Node cap (defaults to OBNOXLP_NODE_BUDGET)")


def _add_convention(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--convention",
        choices=[item.value for item in Convention],
        help="How a randomized output is scored (default depends on the objective)",
    )


def _search_config(args: argparse.Namespace) -> SearchConfig:
    return SearchConfig(
        n_range=(args.n_min, args.n_max),
        grid_step=args.grid_step,
        restarts=args.restarts,
        seed=args.seed,
        node_budget=args.budget or default_node_budget(),
    )


def _output(args: argparse.Namespace) -> Path | None:
    return Path(args.output) if args.output else None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="obnoxlp",
        description="Strategyproof obnoxious facility location on [0, 1]: ratios, truthfulness, bounds",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug")
    subparsers = parser.add_subparsers(dest="command")

    evaluate_parser = subparsers.add_parser("evaluate", help="ALG, OPT and ratio on one profile")
    evaluate_parser.add_argument("--mechanism", required=True, help="e.g. majority-vote, power-weighted:2")
    evaluate_parser.add_argument("--objective", required=True, help="e.g. su:2, su:max, sc:1")
    evaluate_parser.add_argument("--profile", required=True, help="Comma-separated locations or a CSV file")
    _add_convention(evaluate_parser)
    _add_output(evaluate_parser, ReportFormat.JSON)

    optimize_parser = subparsers.add_parser("optimize", help="Optimal facility location for a profile")
    optimize_parser.add_argument("--objective", required=True)
    optimize_parser.add_argument("--profile", required=True)
    optimize_parser.add_argument("--grid-step", type=float, help="Force the grid oracle with this step")

    for name, help_text in (
        ("verify-sp", "Search grid profiles for a profitable single misreport"),
        ("verify-gsp", "Search grid profiles for a profitable coalition misreport"),
    ):
        verify_parser = subparsers.add_parser(name, help=help_text)
        verify_parser.add_argument("--mechanism", required=True)
        verify_parser.add_argument("--n", type=int, default=2, help="Number of agents")
        verify_parser.add_argument("--grid-step", type=float, default=1 / 50, help="Grid step 1/k")
        verify_parser.add_argument("--budget", type=int, help="Node cap (defaults to OBNOXLP_NODE_BUDGET)")
        verify_parser.add_argument("-o", "--output", help="Witness JSON path (stdout when omitted)")
        if name == "verify-gsp":
            verify_parser.add_argument("--max-coalition", type=int, default=2)

    search_parser = subparsers.add_parser("search-ratio", help="Worst-case ratio search")
    search_parser.add_argument("--mechanism", required=True)
    search_parser.add_argument("--objective", required=True)
    _add_search(search_parser)
    _add_convention(search_parser)
    _add_output(search_parser, ReportFormat.JSON)

    curve_parser = subparsers.add_parser("bound-curve", help="One ratio search per exponent")
    curve_parser.add_argument("--mechanism", required=True)
    curve_parser.add_argument("--family", choices=["su", "sc"], required=True)
    curve_parser.add_argument("--p-values", required=True, help="Comma-separated exponents, inf allowed")
    _add_search(curve_parser)
    _add_output(curve_parser, ReportFormat.CSV)

    table_parser = subparsers.add_parser("reproduce-table", help="Check every cell of the bound table")
    _add_search(table_parser)
    _add_output(table_parser, ReportFormat.CSV)

    witnesses_parser = subparsers.add_parser("witnesses", help="Lower-bound witnesses and chains")
    _add_output(witnesses_parser, ReportFormat.CSV)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT)

    if args.command == "evaluate":
        return run_guarded(
            lambda: evaluate_command(
                args.mechanism, args.objective, args.profile, args.convention,
                _output(args), ReportFormat(args.format),
            )
        )
    if args.command == "optimize":
        return run_guarded(lambda: optimize_command(args.objective, args.profile, args.grid_step))
    if args.command == "verify-sp":
        return run_guarded(
            lambda: verify_sp_command(args.mechanism, args.n, args.grid_step, args.budget, _output(args))
        )
    if args.command == "verify-gsp":
        return run_guarded(
            lambda: verify_gsp_command(
                args.mechanism, args.n, args.grid_step, args.max_coalition, args.budget, _output(args)
            )
        )
    if args.command == "search-ratio":
        return run_guarded(
            lambda: search_ratio_command(
                args.mechanism, args.objective, _search_config(args), args.convention,
                _output(args), ReportFormat(args.format),
            )
        )
    if args.command == "bound-curve":
        return run_guarded(
            lambda: bound_curve_command(
                args.mechanism, args.family, args.p_values, _search_config(args),
                _output(args), ReportFormat(args.format),
            )
        )
    if args.command == "reproduce-table":
        return run_guarded(
            lambda: reproduce_table_command(_search_config(args), _output(args), ReportFormat(args.format))
        )
    if args.command == "witnesses":
        return run_guarded(lambda: witnesses_command(_output(args), ReportFormat(args.format)))

    parser.print_help()
    return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
