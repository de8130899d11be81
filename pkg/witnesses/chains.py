"""Parametric lower-bound chains evaluated numerically.

The two-agent min-utility chain perturbs the profile (0, 1) to (0, x2) with
x2 just above 2(1 + delta)/3; a mechanism that keeps its ratio must put mass
P0 = 3 / (4(1 - 2 delta)) within delta of x2/2. The max-cost chain reuses the
same construction with costs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from adversary.bounds import two_candidate_sc_lower
from core.errors import OutOfRange
from core.model import FacilityDistribution, ObjectiveSpec, Profile, make_profile
from core.numerics import golden_section_max_scalar
from objectives.evaluate import eval_objective
from optima.solver import optimum

DELTA_RANGE = (0.0, 1 / 8)
STATED_MAX_COST_DELTA = 0.026
# x2 approaches its limit from above.
X2_OFFSET = 1e-9
TWO_CANDIDATE_EPSILON = 1e-4


@dataclass(frozen=True)
class ChainPoint:
    delta: float
    p0: float
    x2: float
    alg: float
    opt: float


def chain_point(delta: float, offset: float = X2_OFFSET) -> ChainPoint:
    if not DELTA_RANGE[0] <= delta <= DELTA_RANGE[1]:
        raise OutOfRange(f"delta must lie in [0, 1/8], got {delta}")
    p0 = 3 / (4 * (1 - 2 * delta))
    x2 = 2 * (1 + delta) / 3 + offset
    opt = x2 / 2
    alg = p0 * opt + (1 - p0) * (opt - delta)
    return ChainPoint(delta=delta, p0=p0, x2=x2, alg=alg, opt=opt)


def min_utility_epsilon(delta: float) -> float:
    point = chain_point(delta)
    return point.opt / point.alg - 1


def min_utility_n2_bound() -> Tuple[float, float]:
    """(delta, epsilon) maximizing the two-agent min-utility chain."""
    delta, epsilon = golden_section_max_scalar(min_utility_epsilon, *DELTA_RANGE, tol=1e-9)
    return delta, epsilon


def max_cost_ratio(delta: float) -> float:
    point = chain_point(delta, offset=0.0)
    return (1 - point.alg) / (1 - point.opt)


@dataclass(frozen=True)
class MaxCostBound:
    stated: float
    optimized: float
    optimized_delta: float


def max_cost_lower_bound() -> MaxCostBound:
    """The chain at delta = 0.026 and re-optimized over delta."""
    delta, best = golden_section_max_scalar(max_cost_ratio, *DELTA_RANGE, tol=1e-9)
    return MaxCostBound(stated=max_cost_ratio(STATED_MAX_COST_DELTA), optimized=best, optimized_delta=delta)


@dataclass(frozen=True)
class TwoCandidateBound:
    p: float
    claimed: float
    ratio: float
    witness: Profile

    @property
    def power_gap(self) -> float:
        """Claimed p-power bound minus the witnessed p-power ratio."""
        if math.isinf(self.p):
            return self.claimed - self.ratio
        return self.claimed**self.p - self.ratio**self.p


def two_candidate_sc_bound(p: float, epsilon: float = TWO_CANDIDATE_EPSILON) -> TwoCandidateBound:
    """Evaluate the fair mixture over {0, 1} on (1/2 - epsilon, 1), or on (0, 1) for the max cost."""
    mixture = FacilityDistribution.discrete([(0.0, 0.5), (1.0, 0.5)])
    if math.isinf(p):
        spec = ObjectiveSpec.sc_max()
        witness = make_profile([0.0, 1.0])
        claimed = 2.0
    else:
        if p < 1.0:
            raise OutOfRange(f"p must be >= 1, got {p}")
        spec = ObjectiveSpec.sc(p)
        witness = make_profile([0.5 - epsilon, 1.0])
        claimed = two_candidate_sc_lower(p)
    alg = eval_objective(spec, witness, mixture).value
    ratio = alg / optimum(spec, witness).value
    return TwoCandidateBound(p=p, claimed=claimed, ratio=ratio, witness=witness)


def uniform_geomean_agent_ratio(step: float = 1e-5) -> Tuple[float, float]:
    """Largest max(x, 1 - x) over the uniform expected distance (2x^2 - 2x + 1)/2."""
    if not 0.0 < step <= 0.5:
        raise OutOfRange(f"step must lie in (0, 0.5], got {step}")
    xs = np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1)
    ratios = np.maximum(xs, 1.0 - xs) / ((2.0 * xs**2 - 2.0 * xs + 1.0) / 2.0)
    i = int(np.argmax(ratios))
    return float(ratios[i]), float(xs[i])

