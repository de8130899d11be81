from __future__ import annotations

import math
from typing import List


def format_number(value: float) -> str:
    """Fixed report formatting: 12 significant digits, lowercase ``inf``."""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if math.isnan(value):
        return "nan"
    return f"{value:.12g}"


def parse_float_list(text: str) -> List[float]:
    parts = [part.strip() for part in text.split(",")]
    try:
        return [float(part) for part in parts if part]
    except ValueError as exc:
        raise ValueError(f"Not a comma-separated list of numbers: {text!r}") from exc


def json_number(value: float) -> float | str:
    # JSON has no infinity literal; reports carry the same sentinel as CSV.
    return format_number(value) if math.isinf(value) or math.isnan(value) else value
