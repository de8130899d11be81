from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Callable, List, Mapping, Optional, Sequence

from adversary.search import bound_curve, ratio_of, search_worst_ratio
from core.config import SearchConfig
from core.errors import BudgetExceeded, ObnoxError, QuadratureFailure
from core.model import ObjectiveSpec, Profile, make_profile
from core.utils import format_number, parse_float_list
from mechanisms.registry import MechanismSpec, parse_mechanism, run_mechanism
from objectives.evaluate import Convention, default_convention, eval_objective
from optima.solver import opt_grid, optimum
from reports.exporter import ReportFormat, evaluation_payload, flatten, load_profile_csv, render, write_report
from reports.table import COLUMNS, TableConfig, TableRow, has_falsification, reproduce_table, witness_suite
from truthfulness.checker import DeviationWitness, check_gsp, check_sp

_logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_WITNESS = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_BUDGET = 4


def run_guarded(command: Callable[[], int]) -> int:
    """Run a command and map library failures to exit codes."""
    try:
        return command()
    except BudgetExceeded as exc:
        print(f"Budget exceeded: {exc}")
        return EXIT_BUDGET
    except QuadratureFailure as exc:
        print(f"Numeric failure: {exc}")
        return EXIT_NUMERIC
    except (ObnoxError, ValueError) as exc:
        print(f"Configuration error: {exc}")
        return EXIT_CONFIG


def resolve_profile(text: str) -> Profile:
    """Inline comma-separated locations, or a path to a one-column CSV file."""
    path = Path(text)
    if path.suffix.lower() == ".csv" or path.is_file():
        return load_profile_csv(path)
    return make_profile(parse_float_list(text))


def _emit(
    rows: Sequence[Mapping[str, Any]],
    output: Optional[Path],
    fmt: ReportFormat,
    columns: Sequence[str] | None = None,
) -> None:
    if output is None:
        print(render(rows, fmt, columns), end="" if fmt == ReportFormat.CSV else "\n")
        return
    write_report(rows, output, fmt, columns)
    print(f"Report written to {output}")


def evaluate_command(
    mechanism: str,
    objective: str,
    profile: str,
    convention: Optional[str] = None,
    output: Optional[Path] = None,
    fmt: ReportFormat = ReportFormat.JSON,
) -> int:
    mech = parse_mechanism(mechanism)
    spec = ObjectiveSpec.parse(objective)
    x = resolve_profile(profile)
    chosen = Convention(convention) if convention else default_convention(spec)
    dist = run_mechanism(mech, x)
    alg = eval_objective(spec, x, dist, chosen).value
    opt = optimum(spec, x)
    ratio = ratio_of(spec, alg, opt.value)
    print(f"Mechanism: {mech.name} -> {dist.describe()}")
    print(f"ALG: {format_number(alg)} | OPT: {format_number(opt.value)} at y={format_number(opt.location)}")
    print(f"Ratio: {format_number(ratio)} ({chosen.value})")
    payload = evaluation_payload(
        mechanism=mech.name,
        objective=spec.name,
        p=spec.p_label,
        profile=x,
        alg=alg,
        opt=opt.value,
        opt_location=opt.location,
        ratio=ratio,
        convention=chosen.value,
    )
    _emit([payload], output, fmt)
    return EXIT_OK


def optimize_command(objective: str, profile: str, grid_step: Optional[float] = None) -> int:
    spec = ObjectiveSpec.parse(objective)
    x = resolve_profile(profile)
    result = opt_grid(spec, x, grid_step) if grid_step else optimum(spec, x)
    print(f"OPT: {format_number(result.value)} at y={format_number(result.location)} ({result.method.value})")
    return EXIT_OK


def _report_witness(
    mech: MechanismSpec,
    witness: Optional[DeviationWitness],
    output: Optional[Path],
) -> int:
    if witness is None:
        print(f"{mech.name}: no witness")
        return EXIT_OK
    print(f"{mech.name}: witness found")
    _emit([witness.as_dict()], output, ReportFormat.JSON)
    return EXIT_WITNESS


def verify_sp_command(
    mechanism: str,
    n: int,
    grid_step: float,
    node_budget: Optional[int] = None,
    output: Optional[Path] = None,
) -> int:
    mech = parse_mechanism(mechanism)
    return _report_witness(mech, check_sp(mech, n, grid_step, node_budget), output)


def verify_gsp_command(
    mechanism: str,
    n: int,
    grid_step: float,
    max_coalition: int,
    node_budget: Optional[int] = None,
    output: Optional[Path] = None,
) -> int:
    mech = parse_mechanism(mechanism)
    witness = check_gsp(mech, n, grid_step, min(max_coalition, n), node_budget)
    return _report_witness(mech, witness, output)


def search_ratio_command(
    mechanism: str,
    objective: str,
    config: SearchConfig,
    convention: Optional[str] = None,
    output: Optional[Path] = None,
    fmt: ReportFormat = ReportFormat.JSON,
) -> int:
    mech = parse_mechanism(mechanism)
    spec = ObjectiveSpec.parse(objective)
    report = search_worst_ratio(mech, spec, config, Convention(convention) if convention else None)
    claimed = "-" if report.claimed_bound is None else format_number(report.claimed_bound)
    print(f"Worst ratio: {format_number(report.worst_ratio)} (claimed {claimed})")
    print(f"Witness: {', '.join(format_number(v) for v in report.witness.locations)}")
    if report.conjecture:
        print("Claimed value is an open conjecture")
    if report.falsified:
        print("FALSIFICATION: the claimed bound is exceeded")
    _emit([flatten(report.as_dict())], output, fmt)
    return EXIT_WITNESS if report.falsified else EXIT_OK


def bound_curve_command(
    mechanism: str,
    family: str,
    p_values: str,
    config: SearchConfig,
    output: Optional[Path] = None,
    fmt: ReportFormat = ReportFormat.CSV,
) -> int:
    mech = parse_mechanism(mechanism)
    reports = bound_curve(mech, family, parse_float_list(p_values), config)
    for report in reports:
        claimed = "-" if report.claimed_bound is None else format_number(report.claimed_bound)
        print(f"p={report.objective.p_label}: {format_number(report.worst_ratio)} (claimed {claimed})", flush=True)
    _emit([flatten(report.as_dict()) for report in reports], output, fmt)
    return EXIT_WITNESS if any(report.falsified for report in reports) else EXIT_OK


def _table_exit(rows: List[TableRow], output: Optional[Path], fmt: ReportFormat) -> int:
    for row in rows:
        _logger.debug("%s", row.as_dict())
    _emit([row.as_dict() for row in rows], output, fmt, COLUMNS)
    if has_falsification(rows):
        print("FALSIFICATION rows present")
        return EXIT_WITNESS
    return EXIT_OK


def reproduce_table_command(
    config: SearchConfig,
    output: Optional[Path] = None,
    fmt: ReportFormat = ReportFormat.CSV,
) -> int:
    return _table_exit(reproduce_table(TableConfig(search=config)), output, fmt)


def witnesses_command(output: Optional[Path] = None, fmt: ReportFormat = ReportFormat.CSV) -> int:
    return _table_exit(witness_suite(), output, fmt)
