"""Domain types shared by every package: profiles, facility distributions, objectives."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence, Tuple

import numpy as np

from core.config import HALF, P_CAP, TOLERANCES
from core.errors import EmptyProfile, InvalidDistribution, InvalidObjective, OutOfRange


@dataclass(frozen=True)
class Profile:
    """Agent locations on [0, 1], sorted ascending."""

    locations: Tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.locations)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.locations, dtype=float)

    def reflected(self) -> "Profile":
        return make_profile([1.0 - x for x in self.locations])

    def __iter__(self):
        return iter(self.locations)

    def __len__(self) -> int:
        return len(self.locations)


@dataclass(frozen=True)
class SideCounts:
    n1: int
    n2: int

    @property
    def n(self) -> int:
        return self.n1 + self.n2


def make_profile(raw: Iterable[float]) -> Profile:
    values = [float(value) for value in raw]
    if not values:
        raise EmptyProfile("A profile needs at least one agent")
    for value in values:
        if not 0.0 <= value <= 1.0 or math.isnan(value):
            raise OutOfRange(f"Location {value} is outside [0, 1]")
    return Profile(locations=tuple(sorted(values)))


def side_counts(x: Profile) -> SideCounts:
    # x_i = 1/2 belongs to the left side.
    n1 = sum(1 for value in x.locations if value <= HALF)
    return SideCounts(n1=n1, n2=x.n - n1)


class DistributionKind(str, Enum):
    POINT = "point"
    DISCRETE = "discrete"
    UNIFORM_UNIT = "uniform"


@dataclass(frozen=True)
class FacilityDistribution:
    kind: DistributionKind
    support: Tuple[float, ...] = ()
    probs: Tuple[float, ...] = ()

    @staticmethod
    def point(y: float) -> "FacilityDistribution":
        y = float(y)
        if not 0.0 <= y <= 1.0:
            raise OutOfRange(f"Facility location {y} is outside [0, 1]")
        return FacilityDistribution(DistributionKind.POINT, (y,), (1.0,))

    @staticmethod
    def uniform_unit() -> "FacilityDistribution":
        return FacilityDistribution(DistributionKind.UNIFORM_UNIT)

    @staticmethod
    def discrete(pairs: Iterable[Tuple[float, float]]) -> "FacilityDistribution":
        """Build a finite distribution; merges repeated points and drops null mass.

        A total within the normalization slack of 1 is rescaled, anything further
        off is rejected. A single surviving point collapses to ``point``.
        """
        merged: dict[float, float] = {}
        for y, prob in pairs:
            y, prob = float(y), float(prob)
            if not 0.0 <= y <= 1.0:
                raise OutOfRange(f"Support point {y} is outside [0, 1]")
            if prob < -TOLERANCES.distribution_sum or prob > 1.0 + TOLERANCES.normalization_slack:
                raise InvalidDistribution(f"Probability {prob} is outside [0, 1]")
            merged[y] = merged.get(y, 0.0) + max(prob, 0.0)
        total = sum(merged.values())
        if abs(total - 1.0) > TOLERANCES.normalization_slack:
            raise InvalidDistribution(f"Probabilities sum to {total}, expected 1")
        items = sorted((y, prob / total) for y, prob in merged.items() if prob > 0.0)
        if len(items) == 1:
            return FacilityDistribution.point(items[0][0])
        return FacilityDistribution(
            DistributionKind.DISCRETE,
            tuple(y for y, _ in items),
            tuple(prob for _, prob in items),
        )

    @property
    def is_finite(self) -> bool:
        return self.kind != DistributionKind.UNIFORM_UNIT

    def prob_of(self, y: float) -> float:
        for point, prob in zip(self.support, self.probs):
            if point == y:
                return prob
        return 0.0

    def expected_distance(self, xs: Sequence[float] | np.ndarray) -> np.ndarray:
        """Expected |x - y| for every x, y drawn from this distribution."""
        xs = np.asarray(xs, dtype=float)
        if self.kind == DistributionKind.UNIFORM_UNIT:
            return (2.0 * xs**2 - 2.0 * xs + 1.0) / 2.0
        support = np.asarray(self.support)
        probs = np.asarray(self.probs)
        return np.abs(xs[..., None] - support) @ probs

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == DistributionKind.UNIFORM_UNIT:
            return rng.random(size)
        return rng.choice(np.asarray(self.support), size=size, p=np.asarray(self.probs))

    def describe(self) -> str:
        if self.kind == DistributionKind.UNIFORM_UNIT:
            return "Uniform[0,1]"
        if self.kind == DistributionKind.POINT:
            return f"Point({self.support[0]:g})"
        body = ", ".join(f"({y:g}, {p:.6g})" for y, p in zip(self.support, self.probs))
        return f"Discrete{{{body}}}"


def agent_utility(x_i: float, dist: FacilityDistribution) -> float:
    return float(dist.expected_distance(np.asarray([x_i]))[0])


def agent_cost(x_i: float, dist: FacilityDistribution) -> float:
    return 1.0 - agent_utility(x_i, dist)


class ObjectiveKind(str, Enum):
    SU = "su"
    SU_MAX = "su:max"
    SU_MIN = "su:min"
    SU_GEOMEAN = "su:geomean"
    SC = "sc"
    SC_MAX = "sc:max"


class Sense(str, Enum):
    MAX = "max"
    MIN = "min"


@dataclass(frozen=True)
class ObjectiveSpec:
    kind: ObjectiveKind
    p: float | None = None

    def __post_init__(self) -> None:
        if self.kind == ObjectiveKind.SU:
            if self.p is None or not 0.0 < self.p <= P_CAP:
                raise InvalidObjective(f"su requires 0 < p <= {P_CAP:g}, got {self.p}")
        elif self.kind == ObjectiveKind.SC:
            if self.p is None or not 1.0 <= self.p <= P_CAP:
                raise InvalidObjective(f"sc requires 1 <= p <= {P_CAP:g}, got {self.p}")
        elif self.p is not None:
            raise InvalidObjective(f"{self.kind.value} takes no exponent")

    @staticmethod
    def su(p: float) -> "ObjectiveSpec":
        return ObjectiveSpec(ObjectiveKind.SU, float(p))

    @staticmethod
    def sc(p: float) -> "ObjectiveSpec":
        return ObjectiveSpec(ObjectiveKind.SC, float(p))

    @staticmethod
    def su_max() -> "ObjectiveSpec":
        return ObjectiveSpec(ObjectiveKind.SU_MAX)

    @staticmethod
    def su_min() -> "ObjectiveSpec":
        return ObjectiveSpec(ObjectiveKind.SU_MIN)

    @staticmethod
    def su_geomean() -> "ObjectiveSpec":
        return ObjectiveSpec(ObjectiveKind.SU_GEOMEAN)

    @staticmethod
    def sc_max() -> "ObjectiveSpec":
        return ObjectiveSpec(ObjectiveKind.SC_MAX)

    @staticmethod
    def parse(text: str) -> "ObjectiveSpec":
        """Parse ``su:<p>``, ``su:max``, ``su:min``, ``su:geomean``, ``sc:<p>``, ``sc:max``."""
        raw = text.strip().lower()
        family, sep, arg = raw.partition(":")
        if not sep or family not in ("su", "sc"):
            raise InvalidObjective(f"Unknown objective: {text!r}")
        named = {
            "su:max": ObjectiveKind.SU_MAX,
            "su:inf": ObjectiveKind.SU_MAX,
            "su:min": ObjectiveKind.SU_MIN,
            "su:-inf": ObjectiveKind.SU_MIN,
            "su:geomean": ObjectiveKind.SU_GEOMEAN,
            "sc:max": ObjectiveKind.SC_MAX,
            "sc:inf": ObjectiveKind.SC_MAX,
        }
        if raw in named:
            return ObjectiveSpec(named[raw])
        try:
            p = float(arg)
        except ValueError as exc:
            raise InvalidObjective(f"Unknown objective: {text!r}") from exc
        if not math.isfinite(p):
            raise InvalidObjective(f"Use {family}:max for infinite p, got {text!r}")
        return ObjectiveSpec.su(p) if family == "su" else ObjectiveSpec.sc(p)

    @property
    def sense(self) -> Sense:
        return Sense.MAX if self.is_utility else Sense.MIN

    @property
    def is_utility(self) -> bool:
        return self.kind in (
            ObjectiveKind.SU,
            ObjectiveKind.SU_MAX,
            ObjectiveKind.SU_MIN,
            ObjectiveKind.SU_GEOMEAN,
        )

    @property
    def has_power(self) -> bool:
        return self.kind in (ObjectiveKind.SU, ObjectiveKind.SC)

    @property
    def family(self) -> str:
        return "su" if self.is_utility else "sc"

    @property
    def p_label(self) -> str:
        """Exponent as it appears in reports: a number, ``inf``, ``-inf`` or ``0+``."""
        if self.has_power:
            return f"{self.p:g}"
        return {
            ObjectiveKind.SU_MAX: "inf",
            ObjectiveKind.SC_MAX: "inf",
            ObjectiveKind.SU_MIN: "-inf",
            ObjectiveKind.SU_GEOMEAN: "0+",
        }[self.kind]

    @property
    def name(self) -> str:
        if self.has_power:
            return f"{self.family}:{self.p:g}"
        return self.kind.value
