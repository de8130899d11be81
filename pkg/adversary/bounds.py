"""Closed-form approximation bounds: per-mechanism upper bounds and per-objective lower bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from core.model import ObjectiveKind, ObjectiveSpec
from mechanisms.registry import MechanismKind, MechanismSpec

SU_MAX_RANDOMIZED_LOWER = 6 / 5
SU_MAX_RANDOMIZED_UPPER = 4 / 3
GEOMEAN_RANDOMIZED_LOWER = math.sqrt(6 / 5)
GEOMEAN_RANDOMIZED_UPPER = math.sqrt(2) + 1
MIN_UTILITY_N2_LOWER = 1.026
MAX_COST_RANDOMIZED_LOWER = 1.008
DETERMINISTIC_MAX_BOUND = 2.0
SQUARE_WEIGHTED_BOUND = 2.0


def deterministic_bound(p: float) -> float:
    """(2^p + 1)^(1/p), written so that large p does not overflow."""
    return 2.0 * (1.0 + 2.0 ** (-p)) ** (1.0 / p)


def power_weighted_bound(p: float) -> float:
    if p < 1.0:
        return 2.0 ** (1.0 / p)
    return (2.0 * (1.0 + 2.0 ** (-p)) / (1.0 + 2.0 ** (1.0 - p))) ** (1.0 / p)


def su_randomized_lower(p: float) -> float:
    """(4(3^p + 1) / (3(3^p + 1) + 2))^(1/p)."""
    base = 3.0**p + 1.0
    return (4.0 * base / (3.0 * base + 2.0)) ** (1.0 / p)


def sc_randomized_lower(p: float) -> float:
    return (5 / 4) ** (1.0 / p)


def two_candidate_sc_lower(p: float) -> float:
    return (2.0 ** (p - 1.0) + 1.0) ** (1.0 / p)


@dataclass(frozen=True)
class ClaimedBound:
    value: Optional[float]
    conjecture: bool = False
    source: str = ""


NO_CLAIM = ClaimedBound(None)


def claimed_bound(mech: MechanismSpec, spec: ObjectiveSpec) -> ClaimedBound:
    """Proven upper bound on the ratio of ``mech`` under ``spec``, if one exists.

    ``math.inf`` marks a proven unboundedness; ``None`` means no claim, in
    which case ``conjecture`` may still flag an open conjectured value.
    """
    kind = spec.kind
    if mech.kind == MechanismKind.MAJORITY_VOTE:
        if spec.has_power:
            return ClaimedBound(deterministic_bound(spec.p), source="majority vote")
        if kind in (ObjectiveKind.SU_MAX, ObjectiveKind.SC_MAX):
            return ClaimedBound(DETERMINISTIC_MAX_BOUND, source="majority vote")
        return ClaimedBound(math.inf, source="deterministic unboundedness")
    if mech.kind == MechanismKind.POWER_WEIGHTED:
        if kind == ObjectiveKind.SU and spec.p == mech.p:
            return ClaimedBound(power_weighted_bound(spec.p), source="power-weighted randomization")
        if kind == ObjectiveKind.SU_MAX and math.isinf(mech.p):
            return ClaimedBound(SU_MAX_RANDOMIZED_UPPER, source="power-weighted limit")
        return NO_CLAIM
    if mech.kind == MechanismKind.SQUARE_WEIGHTED:
        if kind == ObjectiveKind.SC_MAX or (kind == ObjectiveKind.SC and spec.p == 1.0):
            return ClaimedBound(SQUARE_WEIGHTED_BOUND, source="square-weighted randomization")
        if kind == ObjectiveKind.SC:
            return ClaimedBound(None, conjecture=True, source="conjectured 2 for every p >= 1")
        return NO_CLAIM
    if mech.kind == MechanismKind.UNIFORM and kind == ObjectiveKind.SU_GEOMEAN:
        return ClaimedBound(GEOMEAN_RANDOMIZED_UPPER, source="uniform distribution")
    return NO_CLAIM

