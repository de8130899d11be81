from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from core.config import P_CAP
from core.errors import InvalidMechanism
from core.model import FacilityDistribution, ObjectiveSpec, Profile
from mechanisms import catalog


class MechanismKind(str, Enum):
    MAJORITY_VOTE = "majority-vote"
    UNIFORM = "uniform"
    SQUARE_WEIGHTED = "square-weighted"
    POWER_WEIGHTED = "power-weighted"
    THRESHOLD = "threshold"
    CUSTOM = "custom"


CustomFn = Callable[[Profile], FacilityDistribution]


@dataclass(frozen=True)
class CustomEntry:
    fn: CustomFn
    deterministic: bool


_CUSTOM: Dict[str, CustomEntry] = {}


def register_custom(name: str, fn: CustomFn, deterministic: bool = True) -> None:
    """Register a profile -> distribution function under ``custom:<name>``.

    Functions must be pure: the truthfulness checks call them once per grid
    profile and cache nothing between runs.
    """
    key = name.strip().lower()
    if not key or ":" in key:
        raise InvalidMechanism(f"Invalid custom mechanism name: {name!r}")
    _CUSTOM[key] = CustomEntry(fn=fn, deterministic=deterministic)


def custom_names() -> List[str]:
    return sorted(_CUSTOM)


def _dictator(x: Profile) -> FacilityDistribution:
    return FacilityDistribution.point(x.locations[0])


def _average(x: Profile) -> FacilityDistribution:
    return FacilityDistribution.point(min(max(sum(x.locations) / x.n, 0.0), 1.0))


def _median_left(x: Profile) -> FacilityDistribution:
    return FacilityDistribution.point(x.locations[(x.n - 1) // 2])


register_custom("dictator", _dictator)
register_custom("average", _average)
register_custom("median-left", _median_left)


@dataclass(frozen=True)
class MechanismSpec:
    kind: MechanismKind
    p: Optional[float] = None
    a: Optional[float] = None
    b: Optional[float] = None
    cutoff: Optional[int] = None
    handle: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind == MechanismKind.POWER_WEIGHTED:
            if self.p is None or not (math.isinf(self.p) and self.p > 0 or 0.0 < self.p <= P_CAP):
                raise InvalidMechanism(f"power-weighted needs 0 < p <= {P_CAP:g} or inf, got {self.p}")
        if self.kind == MechanismKind.THRESHOLD:
            if self.a is None or self.b is None or self.cutoff is None:
                raise InvalidMechanism("threshold needs a, b and cutoff")
            if not 0.0 <= self.a < self.b <= 1.0:
                raise InvalidMechanism(f"threshold needs 0 <= a < b <= 1, got a={self.a}, b={self.b}")
            if self.cutoff < 0:
                raise InvalidMechanism(f"threshold cutoff must be >= 0, got {self.cutoff}")
        if self.kind == MechanismKind.CUSTOM and self.handle not in _CUSTOM:
            raise InvalidMechanism(
                f"Unknown custom mechanism {self.handle!r}; registered: {', '.join(custom_names())}"
            )

    @staticmethod
    def majority_vote() -> "MechanismSpec":
        return MechanismSpec(MechanismKind.MAJORITY_VOTE)

    @staticmethod
    def uniform() -> "MechanismSpec":
        return MechanismSpec(MechanismKind.UNIFORM)

    @staticmethod
    def square_weighted() -> "MechanismSpec":
        return MechanismSpec(MechanismKind.SQUARE_WEIGHTED)

    @staticmethod
    def power_weighted(p: float) -> "MechanismSpec":
        return MechanismSpec(MechanismKind.POWER_WEIGHTED, p=float(p))

    @staticmethod
    def threshold(a: float, b: float, cutoff: int) -> "MechanismSpec":
        return MechanismSpec(MechanismKind.THRESHOLD, a=float(a), b=float(b), cutoff=int(cutoff))

    @staticmethod
    def custom(handle: str) -> "MechanismSpec":
        return MechanismSpec(MechanismKind.CUSTOM, handle=handle.strip().lower())

    @property
    def name(self) -> str:
        if self.kind == MechanismKind.POWER_WEIGHTED:
            return f"power-weighted:{self.p:g}"
        if self.kind == MechanismKind.THRESHOLD:
            return f"threshold:{self.a:g},{self.b:g},{self.cutoff}"
        if self.kind == MechanismKind.CUSTOM:
            return f"custom:{self.handle}"
        return self.kind.value

    @property
    def deterministic(self) -> bool:
        if self.kind == MechanismKind.CUSTOM:
            return _CUSTOM[self.handle].deterministic
        return self.kind in (MechanismKind.MAJORITY_VOTE, MechanismKind.THRESHOLD)

    @property
    def candidates(self) -> Optional[Tuple[float, ...]]:
        """Fixed output locations, or None when the output range is not a fixed set."""
        if self.kind == MechanismKind.THRESHOLD:
            return (self.a, self.b)
        if self.kind in (
            MechanismKind.MAJORITY_VOTE,
            MechanismKind.SQUARE_WEIGHTED,
            MechanismKind.POWER_WEIGHTED,
        ):
            return (0.0, 1.0)
        return None


@dataclass(frozen=True)
class Mechanism:
    spec: MechanismSpec
    name: str
    deterministic: bool
    candidates: Optional[Tuple[float, ...]]

    def run(self, x: Profile) -> FacilityDistribution:
        return run_mechanism(self.spec, x)

    def claimed_bound(self, objective: ObjectiveSpec) -> Optional[float]:
        from adversary.bounds import claimed_bound

        return claimed_bound(self.spec, objective).value


def describe(mech: MechanismSpec) -> Mechanism:
    return Mechanism(
        spec=mech,
        name=mech.name,
        deterministic=mech.deterministic,
        candidates=mech.candidates,
    )


def parse_mechanism(text: str) -> MechanismSpec:
    raw = text.strip().lower()
    head, _, arg = raw.partition(":")
    try:
        if head == MechanismKind.POWER_WEIGHTED.value and arg:
            return MechanismSpec.power_weighted(float(arg))
        if head == MechanismKind.THRESHOLD.value and arg:
            a, b, cutoff = arg.split(",")
            return MechanismSpec.threshold(float(a), float(b), int(cutoff))
        if head == MechanismKind.CUSTOM.value and arg:
            return MechanismSpec.custom(arg)
    except ValueError as exc:
        if isinstance(exc, InvalidMechanism):
            raise
        raise InvalidMechanism(f"Cannot parse mechanism {text!r}: {exc}") from exc
    plain = {
        MechanismKind.MAJORITY_VOTE.value: MechanismSpec.majority_vote,
        MechanismKind.UNIFORM.value: MechanismSpec.uniform,
        MechanismKind.SQUARE_WEIGHTED.value: MechanismSpec.square_weighted,
    }
    if raw in plain:
        return plain[raw]()
    raise InvalidMechanism(f"Unknown mechanism: {text!r}")


def run_mechanism(mech: MechanismSpec, x: Profile) -> FacilityDistribution:
    if mech.kind == MechanismKind.MAJORITY_VOTE:
        return catalog.run_majority_vote(x)
    if mech.kind == MechanismKind.UNIFORM:
        return catalog.run_uniform(x)
    if mech.kind == MechanismKind.SQUARE_WEIGHTED:
        return catalog.run_square_weighted(x)
    if mech.kind == MechanismKind.POWER_WEIGHTED:
        return catalog.run_power_weighted(x, mech.p)
    if mech.kind == MechanismKind.THRESHOLD:
        if mech.cutoff > x.n + 1:
            raise InvalidMechanism(f"cutoff {mech.cutoff} exceeds n + 1 = {x.n + 1}")
        return catalog.run_two_candidate_threshold(x, mech.a, mech.b, mech.cutoff)
    return _CUSTOM[mech.handle].fn(x)


def batch_outputs(mech: MechanismSpec, profiles: np.ndarray) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """Support and weight matrices (m, k) of the outputs for every profile row.

    Returns None when some output is not finite (the uniform mechanism).
    """
    profiles = np.asarray(profiles, dtype=float)
    m = profiles.shape[0]
    if mech.kind == MechanismKind.UNIFORM:
        return None
    if mech.kind == MechanismKind.CUSTOM:
        return _custom_batch(mech, profiles)
    if mech.kind == MechanismKind.MAJORITY_VOTE:
        p0 = catalog.majority_vote_p0(profiles)
    elif mech.kind == MechanismKind.THRESHOLD:
        if mech.cutoff > profiles.shape[1] + 1:
            raise InvalidMechanism(f"cutoff {mech.cutoff} exceeds n + 1 = {profiles.shape[1] + 1}")
        p0 = catalog.threshold_p0(profiles, mech.a, mech.b, mech.cutoff)
    else:
        n1, n2 = catalog.batch_left_counts(profiles)
        if mech.kind == MechanismKind.SQUARE_WEIGHTED:
            p0 = catalog.square_weighted_p0(n1, n2)
        else:
            p0 = catalog.power_weighted_p0(n1, n2, mech.p)
    support = np.tile(np.asarray(mech.candidates, dtype=float), (m, 1))
    weights = np.stack([p0, 1.0 - p0], axis=1)
    return support, weights


def _custom_batch(mech: MechanismSpec, profiles: np.ndarray) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    outputs = []
    for row in profiles:
        dist = _CUSTOM[mech.handle].fn(Profile(tuple(float(v) for v in row)))
        if not dist.is_finite:
            return None
        outputs.append(dist)
    width = max(len(dist.support) for dist in outputs)
    support = np.zeros((len(outputs), width))
    weights = np.zeros((len(outputs), width))
    for i, dist in enumerate(outputs):
        k = len(dist.support)
        support[i, :k] = dist.support
        # Padding repeats the last point with zero weight.
        support[i, k:] = dist.support[-1]
        weights[i, :k] = dist.probs
    return support, weights
