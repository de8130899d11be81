from __future__ import annotations

import csv
import io
import json
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Sequence

from core.errors import ConfigError, EmptyProfile
from core.model import Profile, make_profile
from core.utils import format_number, json_number


class ReportFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


def _json_value(value: Any) -> Any:
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        return json_number(value)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Mapping):
        return {key: _json_value(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_value(item) for item in value]
    return value


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_number(value)
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, (list, tuple)):
        return " ".join(_csv_cell(item) for item in value)
    return str(value)


def to_json(payload: Any) -> str:
    return json.dumps(_json_value(payload), indent=2)


def to_csv(rows: Sequence[Mapping[str, Any]], columns: Sequence[str] | None = None) -> str:
    """Render rows with a fixed column order; floats use 12 significant digits."""
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({column: _csv_cell(row.get(column)) for column in columns})
    return buffer.getvalue()


def render(rows: Sequence[Mapping[str, Any]], fmt: ReportFormat, columns: Sequence[str] | None = None) -> str:
    if fmt == ReportFormat.CSV:
        return to_csv(rows, columns)
    return to_json(list(rows) if len(rows) != 1 else rows[0])


def write_report(
    rows: Sequence[Mapping[str, Any]],
    output_path: Path,
    fmt: ReportFormat,
    columns: Sequence[str] | None = None,
) -> None:
    output_path.write_text(render(rows, fmt, columns), encoding="utf-8")


def evaluation_payload(
    mechanism: str,
    objective: str,
    p: str,
    profile: Profile,
    alg: float,
    opt: float,
    opt_location: float,
    ratio: float,
    convention: str,
) -> Dict[str, Any]:
    return {
        "mechanism": mechanism,
        "objective": objective,
        "p": p,
        "profile": list(profile.locations),
        "alg": alg,
        "opt": opt,
        "opt_location": opt_location,
        "ratio": ratio,
        "convention": convention,
    }


def flatten(payload: Mapping[str, Any], prefix: str = "") -> Dict[str, Any]:
    """Nested dicts become dotted keys so a JSON report also fits a CSV row."""
    flat: Dict[str, Any] = {}
    for key, value in payload.items():
        name = f"{prefix}{key}"
        if isinstance(value, Mapping):
            flat.update(flatten(value, f"{name}."))
        else:
            flat[name] = value
    return flat


def _parse_number(text: str) -> float:
    value = float(text)
    if math.isnan(value):
        raise ValueError("nan")
    return value


def load_profile_csv(path: Path) -> Profile:
    """Read a one-column CSV of agent locations; a non-numeric first row is a header."""
    if not path.exists():
        raise ConfigError(f"Profile file not found: {path}")
    text = path.read_text(encoding="utf-8")
    locations: List[float] = []
    for index, row in enumerate(csv.reader(io.StringIO(text))):
        cells = [cell.strip() for cell in row if cell.strip()]
        if not cells:
            continue
        if len(cells) > 1:
            raise ConfigError(f"{path}:{index + 1}: expected one column, got {len(cells)}")
        try:
            locations.append(_parse_number(cells[0]))
        except ValueError as exc:
            if index == 0 and not locations:
                continue
            raise ConfigError(f"{path}:{index + 1}: not a number: {cells[0]!r}") from exc
    if not locations:
        raise EmptyProfile(f"No locations in {path}")
    return make_profile(locations)


def load_report(path: Path) -> Any:
    return json.loads(path.read_text(encoding="utf-8"))
