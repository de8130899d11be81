from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from core.errors import SpecNotSupported
from core.model import (
    DistributionKind,
    FacilityDistribution,
    ObjectiveKind,
    ObjectiveSpec,
    Profile,
)
from core.numerics import integrate_kinked


class Convention(str, Enum):
    EXPECTED_AGGREGATE = "ExpectedAggregate"
    AGGREGATE_OF_EXPECTATIONS = "AggregateOfExpectations"
    EXPECTED_POWER = "ExpectedPower"


@dataclass(frozen=True)
class ObjectiveValue:
    value: float
    convention: Convention


def _terms(spec: ObjectiveSpec, distances: np.ndarray) -> np.ndarray:
    return distances if spec.is_utility else 1.0 - distances


def _p_norm(terms: np.ndarray, p: float) -> np.ndarray:
    # Scaled by the largest term so p up to the cap neither overflows nor underflows.
    top = terms.max(axis=-1)
    safe = np.where(top > 0, top, 1.0)
    with np.errstate(under="ignore"):
        scaled = ((terms / safe[..., None]) ** p).sum(axis=-1)
    return np.where(top > 0, top * scaled ** (1.0 / p), 0.0)


def aggregate(spec: ObjectiveSpec, distances: np.ndarray) -> np.ndarray:
    """Apply the objective's aggregator over the last axis of agent distances.

    Costs are derived from distances here, so callers always pass |x_i - y|
    (or per-agent expected distances).
    """
    distances = np.asarray(distances, dtype=float)
    terms = _terms(spec, distances)
    if spec.has_power:
        return _p_norm(terms, spec.p)
    if spec.kind in (ObjectiveKind.SU_MAX, ObjectiveKind.SC_MAX):
        return terms.max(axis=-1)
    if spec.kind == ObjectiveKind.SU_MIN:
        return terms.min(axis=-1)
    with np.errstate(divide="ignore"):
        return np.exp(np.log(terms).mean(axis=-1))


def eval_at_point(spec: ObjectiveSpec, x: Profile, y: float) -> float:
    return float(aggregate(spec, np.abs(x.as_array() - y)))


def eval_at_points(spec: ObjectiveSpec, x: Profile, ys: Sequence[float] | np.ndarray) -> np.ndarray:
    ys = np.asarray(ys, dtype=float)
    return aggregate(spec, np.abs(x.as_array()[None, :] - ys[:, None]))


def _expected_power(terms: np.ndarray, weights: np.ndarray, p: float) -> np.ndarray:
    """(E_k[sum_i t_ki^p])^(1/p) with terms shaped (..., k, n), weights (..., k)."""
    # Null-weight support points must not set the scale.
    terms = np.where(weights[..., None] > 0, terms, 0.0)
    top = terms.max(axis=(-2, -1))
    safe = np.where(top > 0, top, 1.0)
    with np.errstate(under="ignore"):
        sums = ((terms / safe[..., None, None]) ** p).sum(axis=-1)
    inner = (weights * sums).sum(axis=-1)
    return np.where(top > 0, top * inner ** (1.0 / p), 0.0)


def _kinks(x: Profile) -> list[float]:
    # Agent locations plus the midpoints where the nearest or farthest agent switches.
    xs = x.locations
    mids = [(a + b) / 2 for a, b in zip(xs[:-1], xs[1:])]
    return [*xs, *mids, (xs[0] + xs[-1]) / 2]


def eval_expected_aggregate(
    spec: ObjectiveSpec, x: Profile, dist: FacilityDistribution
) -> ObjectiveValue:
    if dist.kind == DistributionKind.UNIFORM_UNIT:
        value = integrate_kinked(lambda y: eval_at_point(spec, x, y), _kinks(x))
    else:
        values = eval_at_points(spec, x, dist.support)
        value = float(np.dot(values, dist.probs))
    return ObjectiveValue(max(value, 0.0), Convention.EXPECTED_AGGREGATE)


def eval_aggregate_of_expectations(
    spec: ObjectiveSpec, x: Profile, dist: FacilityDistribution
) -> ObjectiveValue:
    expected = dist.expected_distance(x.as_array())
    return ObjectiveValue(float(aggregate(spec, expected)), Convention.AGGREGATE_OF_EXPECTATIONS)


def eval_expected_power(
    spec: ObjectiveSpec, x: Profile, dist: FacilityDistribution
) -> ObjectiveValue:
    """p-th root of the expected p-power sum; defined for Su(p) and Sc(p) only."""
    if not spec.has_power:
        raise SpecNotSupported(f"{spec.name} has no exponent to take an expected power of")
    xs = x.as_array()
    if dist.kind == DistributionKind.UNIFORM_UNIT:
        if spec.is_utility:
            top = max(xs[-1], 1.0 - xs[0])
        else:
            top = 1.0
        if top == 0:
            return ObjectiveValue(0.0, Convention.EXPECTED_POWER)

        def integrand(y: float) -> float:
            terms = _terms(spec, np.abs(xs - y)) / top
            return float((terms**spec.p).sum())

        inner = integrate_kinked(integrand, x.locations)
        value = top * max(inner, 0.0) ** (1.0 / spec.p)
    else:
        support = np.asarray(dist.support)
        terms = _terms(spec, np.abs(xs[None, :] - support[:, None]))
        value = float(_expected_power(terms, np.asarray(dist.probs), spec.p))
    return ObjectiveValue(value, Convention.EXPECTED_POWER)


def default_convention(spec: ObjectiveSpec) -> Convention:
    if spec.has_power:
        return Convention.EXPECTED_POWER
    if spec.kind == ObjectiveKind.SU_GEOMEAN:
        return Convention.AGGREGATE_OF_EXPECTATIONS
    return Convention.EXPECTED_AGGREGATE


def eval_objective(
    spec: ObjectiveSpec,
    x: Profile,
    dist: FacilityDistribution,
    convention: Convention | None = None,
) -> ObjectiveValue:
    convention = convention or default_convention(spec)
    if convention == Convention.EXPECTED_POWER:
        return eval_expected_power(spec, x, dist)
    if convention == Convention.AGGREGATE_OF_EXPECTATIONS:
        return eval_aggregate_of_expectations(spec, x, dist)
    return eval_expected_aggregate(spec, x, dist)


def eval_batch(
    spec: ObjectiveSpec,
    profiles: np.ndarray,
    support: np.ndarray,
    weights: np.ndarray,
    convention: Convention | None = None,
) -> np.ndarray:
    """Objective of finite mechanism outputs for many profiles at once.

    ``profiles`` is (m, n); ``support`` and ``weights`` are (m, k), one finite
    distribution per row.
    """
    convention = convention or default_convention(spec)
    distances = np.abs(profiles[:, None, :] - support[:, :, None])
    if convention == Convention.EXPECTED_POWER:
        if not spec.has_power:
            raise SpecNotSupported(f"{spec.name} has no exponent to take an expected power of")
        return _expected_power(_terms(spec, distances), weights, spec.p)
    if convention == Convention.AGGREGATE_OF_EXPECTATIONS:
        return aggregate(spec, (weights[:, :, None] * distances).sum(axis=1))
    return (weights * aggregate(spec, distances)).sum(axis=-1)


def eval_uniform_batch(
    spec: ObjectiveSpec, profiles: np.ndarray, convention: Convention | None = None
) -> np.ndarray | None:
    """Closed-form objective of the uniform distribution on [0, 1] for every profile row.

    Returns None when no closed form is known for the spec and convention.
    """
    convention = convention or default_convention(spec)
    xs = np.asarray(profiles, dtype=float)
    if convention == Convention.AGGREGATE_OF_EXPECTATIONS:
        return aggregate(spec, (2.0 * xs**2 - 2.0 * xs + 1.0) / 2.0)
    linear = spec.has_power and spec.p == 1.0
    if spec.has_power and (convention == Convention.EXPECTED_POWER or linear):
        p = spec.p
        tails = (xs ** (p + 1) + (1.0 - xs) ** (p + 1)) / (p + 1)
        inner = tails if spec.is_utility else 2.0 / (p + 1) - tails
        return inner.sum(axis=1) ** (1.0 / p)
    if convention != Convention.EXPECTED_AGGREGATE:
        return None
    if spec.kind in (ObjectiveKind.SU_MIN, ObjectiveKind.SC_MAX):
        gaps = xs[:, 1:] - xs[:, :-1]
        nearest = xs[:, 0] ** 2 / 2 + (gaps**2).sum(axis=1) / 4 + (1.0 - xs[:, -1]) ** 2 / 2
        return nearest if spec.kind == ObjectiveKind.SU_MIN else 1.0 - nearest
    if spec.kind == ObjectiveKind.SU_MAX:
        left, right = xs[:, 0], xs[:, -1]
        mid = (left + right) / 2
        return right * mid - mid**2 / 2 + (1.0 - mid**2) / 2 - left * (1.0 - mid)
    return None
