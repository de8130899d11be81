from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Tuple

from core.errors import ConfigError

BUDGET_ENV_VAR = "OBNOXLP_NODE_BUDGET"
DEFAULT_NODE_BUDGET = 500_000_000

# Su/Sc exponents above this must use the max variants.
P_CAP = 1e6
DEFAULT_GRID_STEP = 1e-4
SUPPORT_GRID_POINTS = 201
HALF = 0.5


@dataclass(frozen=True)
class Tolerances:
    distribution_sum: float = 1e-12
    normalization_slack: float = 1e-9
    quadrature: float = 1e-9
    strict_gain: float = 1e-9
    golden_section: float = 1e-10
    ratio_reproduction: float = 1e-7
    tie: float = 1e-12


TOLERANCES = Tolerances()


@dataclass(frozen=True)
class SearchConfig:
    n_range: Tuple[int, int] = (2, 2)
    grid_step: float = 1e-3
    restarts: int = 0
    seed: int = 0
    node_budget: int = DEFAULT_NODE_BUDGET
    local_seeds: int = 4
    min_step: float = 1e-6
    exhaustive_n3_step: float = 1 / 50

    def __post_init__(self) -> None:
        low, high = self.n_range
        if not 1 <= low <= high <= 8:
            raise ConfigError(f"n_range must lie within [1, 8], got {self.n_range}")
        if not 0 < self.grid_step <= 0.5:
            raise ConfigError(f"grid_step must lie in (0, 0.5], got {self.grid_step}")
        if self.restarts < 0:
            raise ConfigError(f"restarts must be >= 0, got {self.restarts}")

    def as_dict(self) -> dict:
        return {
            "n_range": list(self.n_range),
            "grid_step": self.grid_step,
            "restarts": self.restarts,
            "seed": self.seed,
        }


def default_node_budget() -> int:
    raw = os.environ.get(BUDGET_ENV_VAR)
    if raw is None or not raw.strip():
        return DEFAULT_NODE_BUDGET
    try:
        value = int(float(raw))
    except ValueError as exc:
        raise ConfigError(f"{BUDGET_ENV_VAR} must be an integer, got {raw!r}") from exc
    if value <= 0:
        raise ConfigError(f"{BUDGET_ENV_VAR} must be positive, got {value}")
    return value
