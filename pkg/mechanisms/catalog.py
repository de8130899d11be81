"""Endpoint mechanisms and the two-candidate threshold family.

Every function here has a scalar form returning a ``FacilityDistribution``
and a batched form returning the probability of the first candidate for each
row of a (m, n) profile matrix.
"""
from __future__ import annotations

import math

import numpy as np

from core.config import HALF
from core.model import FacilityDistribution, Profile, side_counts


def _two_point(a: float, b: float, prob_a: float) -> FacilityDistribution:
    if prob_a >= 1.0:
        return FacilityDistribution.point(a)
    if prob_a <= 0.0:
        return FacilityDistribution.point(b)
    return FacilityDistribution.discrete([(a, prob_a), (b, 1.0 - prob_a)])


def run_majority_vote(x: Profile) -> FacilityDistribution:
    counts = side_counts(x)
    return FacilityDistribution.point(0.0 if counts.n1 <= counts.n2 else 1.0)


def run_uniform(x: Profile) -> FacilityDistribution:
    return FacilityDistribution.uniform_unit()


def square_weighted_p0(n1: np.ndarray | int, n2: np.ndarray | int) -> np.ndarray | float:
    n1 = np.asarray(n1, dtype=float)
    n2 = np.asarray(n2, dtype=float)
    return n2**2 / (n1**2 + n2**2)


def power_weighted_p0(n1: np.ndarray | int, n2: np.ndarray | int, p: float) -> np.ndarray | float:
    """Probability of locating at 0; the limit 1/2 at p = inf when both sides are occupied.

    Numerator and denominator are divided by 2^p, so large p stays finite.
    """
    n1 = np.asarray(n1, dtype=float)
    n2 = np.asarray(n2, dtype=float)
    scale = 0.0 if math.isinf(p) else 2.0 ** (-p)
    with np.errstate(invalid="ignore", divide="ignore"):
        mixed = (n2**2 * scale + n1 * n2) / ((n1**2 + n2**2) * scale + 2.0 * n1 * n2)
    return np.where(n1 == 0, 1.0, np.where(n2 == 0, 0.0, mixed))


def run_square_weighted(x: Profile) -> FacilityDistribution:
    counts = side_counts(x)
    return _two_point(0.0, 1.0, float(square_weighted_p0(counts.n1, counts.n2)))


def run_power_weighted(x: Profile, p: float) -> FacilityDistribution:
    counts = side_counts(x)
    return _two_point(0.0, 1.0, float(power_weighted_p0(counts.n1, counts.n2, p)))


def closer_to_first(locations: np.ndarray, a: float, b: float) -> np.ndarray:
    # Equidistant agents count toward b.
    return (np.abs(locations - a) < np.abs(locations - b)).sum(axis=-1)


def run_two_candidate_threshold(x: Profile, a: float, b: float, cutoff: int) -> FacilityDistribution:
    k = int(closer_to_first(x.as_array(), a, b))
    return FacilityDistribution.point(a if k >= cutoff else b)


def batch_left_counts(profiles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n1 = (profiles <= HALF).sum(axis=1)
    return n1, profiles.shape[1] - n1


def majority_vote_p0(profiles: np.ndarray) -> np.ndarray:
    n1, n2 = batch_left_counts(profiles)
    return (n1 <= n2).astype(float)


def threshold_p0(profiles: np.ndarray, a: float, b: float, cutoff: int) -> np.ndarray:
    return (closer_to_first(profiles, a, b) >= cutoff).astype(float)
