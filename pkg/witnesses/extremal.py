"""Extremal facility distributions under a moment constraint E|y - anchor| <= budget.

With the objective linear in the distribution, the problem is a linear program
with one inequality besides normalization, so an optimal basic solution is a
single feasible point or a two-point mixture on which the constraint is tight.
Both families are enumerated over the support grid.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from adversary.bounds import su_randomized_lower, sc_randomized_lower
from core.config import SUPPORT_GRID_POINTS, TOLERANCES
from core.errors import Infeasible, OutOfRange, SpecNotSupported
from core.model import FacilityDistribution, ObjectiveKind, ObjectiveSpec, Profile, Sense, make_profile
from objectives.evaluate import aggregate
from optima.solver import optimum

_logger = logging.getLogger(__name__)

REFERENCE_PROFILE = (1 / 3, 1.0)
REFERENCE_ANCHOR = 2 / 3
REFERENCE_BUDGET = 1 / 2
GEOMEAN_Q_STEPS = 100_000


@dataclass(frozen=True)
class ConstrainedDistProblem:
    profile: Profile
    objective: ObjectiveSpec
    anchor: float
    budget: float
    support_grid: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if not 0.0 <= self.anchor <= 1.0:
            raise OutOfRange(f"anchor {self.anchor} is outside [0, 1]")
        limit = max(self.anchor, 1.0 - self.anchor)
        if not 0.0 <= self.budget <= limit + TOLERANCES.normalization_slack:
            raise OutOfRange(f"budget must lie in [0, {limit:g}], got {self.budget}")

    @property
    def sense(self) -> Sense:
        return self.objective.sense

    def grid(self) -> np.ndarray:
        """Support grid joined with every agent location and the anchor."""
        base = self.support_grid or tuple(np.linspace(0.0, 1.0, SUPPORT_GRID_POINTS))
        return np.unique(np.asarray([*base, *self.profile.locations, self.anchor], dtype=float))

    def costs(self, ys: np.ndarray) -> np.ndarray:
        return np.abs(ys - self.anchor)


@dataclass(frozen=True)
class ExtremalSolution:
    """``criterion`` is the optimized quantity; ``value`` is the objective it induces.

    The criterion is E[sum of p-powers] for Su(p)/Sc(p), E[aggregate] for the
    max and min variants, and the product of expected utilities for the
    geometric mean.
    """

    distribution: FacilityDistribution
    value: float
    criterion: float


def pointwise_criterion(spec: ObjectiveSpec, x: Profile, ys: np.ndarray) -> np.ndarray:
    distances = np.abs(x.as_array()[None, :] - np.asarray(ys)[:, None])
    if spec.has_power:
        terms = distances if spec.is_utility else 1.0 - distances
        return (terms**spec.p).sum(axis=1)
    if spec.kind == ObjectiveKind.SU_GEOMEAN:
        raise SpecNotSupported("The geometric mean is not linear in the distribution")
    return aggregate(spec, distances)


def _value_from_criterion(spec: ObjectiveSpec, criterion: float) -> float:
    return criterion ** (1.0 / spec.p) if spec.has_power else criterion


def _tight_weight(cost_a: np.ndarray, cost_b: np.ndarray, budget: float) -> np.ndarray:
    # Weight on a that makes the mixture's expected cost equal the budget.
    with np.errstate(divide="ignore", invalid="ignore"):
        return (cost_b - budget) / (cost_b - cost_a)


def solve_extremal_distribution(prob: ConstrainedDistProblem) -> ExtremalSolution:
    if prob.objective.kind == ObjectiveKind.SU_GEOMEAN:
        return geomean_scan(prob)
    ys = prob.grid()
    values = pointwise_criterion(prob.objective, prob.profile, ys)
    costs = prob.costs(ys)
    slack = prob.budget + TOLERANCES.normalization_slack
    cheap = np.flatnonzero(costs <= slack)
    if cheap.size == 0:
        raise Infeasible(f"No support point lies within {prob.budget:g} of {prob.anchor:g}")
    dear = np.flatnonzero(costs > slack)
    lo, hi = np.meshgrid(cheap, dear, indexing="ij")
    lo, hi = lo.ravel(), hi.ravel()
    weights = np.clip(_tight_weight(costs[lo], costs[hi], prob.budget), 0.0, 1.0)
    mixed = weights * values[lo] + (1.0 - weights) * values[hi]
    criteria = np.concatenate([values[cheap], mixed])
    pick = int(np.argmax(criteria) if prob.sense == Sense.MAX else np.argmin(criteria))
    if pick < cheap.size:
        dist = FacilityDistribution.point(ys[cheap[pick]])
    else:
        j = pick - cheap.size
        dist = FacilityDistribution.discrete(
            [(ys[lo[j]], weights[j]), (ys[hi[j]], 1.0 - weights[j])]
        )
    criterion = float(criteria[pick])
    _logger.debug("Extremal %s: %s (criterion %.12g)", prob.objective.name, dist.describe(), criterion)
    return ExtremalSolution(dist, _value_from_criterion(prob.objective, criterion), criterion)


def geomean_scan(prob: ConstrainedDistProblem, q_steps: int = GEOMEAN_Q_STEPS) -> ExtremalSolution:
    """Best two-point distribution for the product of expected utilities.

    Pairs come from {0, 1, anchor} and the agent locations; the weight on the
    first point runs over a uniform grid plus the weight making the constraint tight.
    """
    xs = prob.profile.as_array()
    points = np.unique(np.asarray([0.0, 1.0, prob.anchor, *xs]))
    slack = prob.budget + TOLERANCES.normalization_slack
    grid = np.linspace(0.0, 1.0, q_steps + 1)
    best: Tuple[float, float, float, float] | None = None
    for i, a in enumerate(points):
        for b in points[i + 1 :]:
            cost_a, cost_b = abs(a - prob.anchor), abs(b - prob.anchor)
            qs = grid
            if cost_a != cost_b:
                tight = float(_tight_weight(np.asarray(cost_a), np.asarray(cost_b), prob.budget))
                if 0.0 <= tight <= 1.0:
                    qs = np.append(grid, tight)
            feasible = qs * cost_a + (1.0 - qs) * cost_b <= slack
            qs = qs[feasible]
            if qs.size == 0:
                continue
            expected = qs[:, None] * np.abs(xs - a) + (1.0 - qs[:, None]) * np.abs(xs - b)
            products = expected.prod(axis=1)
            k = int(np.argmax(products))
            if best is None or products[k] > best[0]:
                best = (float(products[k]), float(a), float(b), float(qs[k]))
    if best is None:
        raise Infeasible(f"No two-point distribution meets E|y - {prob.anchor:g}| <= {prob.budget:g}")
    product, a, b, q = best
    dist = FacilityDistribution.discrete([(a, q), (b, 1.0 - q)])
    return ExtremalSolution(dist, product ** (1.0 / xs.size), product)


def reference_problem(spec: ObjectiveSpec) -> ConstrainedDistProblem:
    return ConstrainedDistProblem(
        profile=make_profile(REFERENCE_PROFILE),
        objective=spec,
        anchor=REFERENCE_ANCHOR,
        budget=REFERENCE_BUDGET,
    )


def extremal_ratio(prob: ConstrainedDistProblem, solution: ExtremalSolution) -> float:
    """Ratio of OPT to the extremal value in the objective's own direction.

    Geometric means compare products (OPT^n over the product of expectations).
    """
    opt = optimum(prob.objective, prob.profile).value
    if prob.objective.kind == ObjectiveKind.SU_GEOMEAN:
        return opt ** prob.profile.n / solution.criterion
    if prob.objective.is_utility:
        return opt / solution.value
    return solution.value / opt


@dataclass(frozen=True)
class LowerBoundRow:
    p: float
    closed_form: float
    reproduced: float
    support: Tuple[float, ...]

    @property
    def gap(self) -> float:
        return abs(self.closed_form - self.reproduced)


def _curve(family: str, p_values: Sequence[float]) -> List[LowerBoundRow]:
    rows = []
    for p in p_values:
        p = float(p)
        if family == "su":
            spec = ObjectiveSpec.su_max() if math.isinf(p) else ObjectiveSpec.su(p)
            closed = 6 / 5 if math.isinf(p) else su_randomized_lower(p)
        else:
            spec = ObjectiveSpec.sc(p)
            closed = sc_randomized_lower(p)
        prob = reference_problem(spec)
        solution = solve_extremal_distribution(prob)
        rows.append(
            LowerBoundRow(
                p=p,
                closed_form=closed,
                reproduced=extremal_ratio(prob, solution),
                support=solution.distribution.support,
            )
        )
    return rows


def lower_bound_curve_su(p_values: Sequence[float]) -> List[LowerBoundRow]:
    """Randomized su lower bound per p, closed form next to the extremal LP value."""
    return _curve("su", p_values)


def lower_bound_curve_sc(p_values: Sequence[float]) -> List[LowerBoundRow]:
    return _curve("sc", p_values)
