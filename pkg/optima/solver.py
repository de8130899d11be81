"""OPT for every objective: closed forms, candidate sets and a bracketing grid oracle.

Between consecutive breakpoints {0, x_1, ..., x_n, 1} each supported objective
is unimodal in the direction it is optimized (convex terms for Su(p >= 1),
SuMax, Sc(p >= 1) and ScMax, concave or log-concave terms for Su(p < 1),
SuMin and SuGeoMean), so a golden-section pass per piece is exact up to its
tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

from core.config import DEFAULT_GRID_STEP, TOLERANCES
from core.errors import OutOfRange, SpecNotSupported
from core.model import ObjectiveKind, ObjectiveSpec, Profile, Sense
from core.numerics import golden_section_max, golden_section_min
from objectives.evaluate import aggregate, eval_at_points


class Method(str, Enum):
    CLOSED_FORM = "ClosedForm"
    CANDIDATE_SET = "CandidateSet"
    GRID_REFINED = "GridRefined"


@dataclass(frozen=True)
class OptResult:
    value: float
    location: float
    method: Method


def _pick_rows(spec: ObjectiveSpec, ys: np.ndarray, values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    # Best value per row; near-ties within the tie tolerance go to the smallest y.
    if spec.sense == Sense.MAX:
        target = values.max(axis=1)
    else:
        target = values.min(axis=1)
    tied = np.abs(values - target[:, None]) <= TOLERANCES.tie
    choice = np.where(tied, ys, np.inf).argmin(axis=1)
    rows = np.arange(ys.shape[0])
    return values[rows, choice], ys[rows, choice]


def _pick(spec: ObjectiveSpec, ys: np.ndarray, values: np.ndarray, method: Method) -> OptResult:
    value, location = _pick_rows(spec, ys[None, :], values[None, :])
    return OptResult(float(value[0]), float(location[0]), method)


def _midpoints(profiles: np.ndarray) -> np.ndarray:
    return (profiles[:, :-1] + profiles[:, 1:]) / 2


def refine_pieces(spec: ObjectiveSpec, profiles: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Golden-section optimum of every piece between consecutive breakpoints.

    ``profiles`` is (m, n) with sorted rows; returns locations and values of
    shape (m, n + 1).
    """
    m, n = profiles.shape
    edges = np.concatenate([np.zeros((m, 1)), profiles, np.ones((m, 1))], axis=1)
    lo = edges[:, :-1].ravel()
    hi = edges[:, 1:].ravel()
    rows = np.repeat(profiles, n + 1, axis=0)

    def objective(ys: np.ndarray) -> np.ndarray:
        return aggregate(spec, np.abs(rows - ys[:, None]))

    if spec.sense == Sense.MAX:
        ys, values = golden_section_max(objective, lo, hi)
    else:
        ys, values = golden_section_min(objective, lo, hi)
    return ys.reshape(m, n + 1), values.reshape(m, n + 1)


def _gap_candidates(profiles: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Locations 0, 1 and every midpoint with the nearest-agent distance there."""
    m = profiles.shape[0]
    ys = np.concatenate([np.zeros((m, 1)), _midpoints(profiles), np.ones((m, 1))], axis=1)
    nearest = np.concatenate(
        [
            profiles[:, :1],
            (profiles[:, 1:] - profiles[:, :-1]) / 2,
            1.0 - profiles[:, -1:],
        ],
        axis=1,
    )
    return ys, nearest


def opt_su_min(x: Profile) -> OptResult:
    ys, nearest = _gap_candidates(x.as_array()[None, :])
    return _pick(ObjectiveSpec.su_min(), ys[0], nearest[0], Method.CLOSED_FORM)


def _candidate_locations(spec: ObjectiveSpec, profiles: np.ndarray) -> np.ndarray:
    m = profiles.shape[0]
    ends = np.tile([0.0, 1.0], (m, 1))
    if spec.is_utility:
        return ends
    return np.concatenate([ends, profiles, _midpoints(profiles)], axis=1)


def _supports_candidates(spec: ObjectiveSpec) -> bool:
    if spec.kind in (ObjectiveKind.SU_MAX, ObjectiveKind.SC_MAX, ObjectiveKind.SC):
        return True
    return spec.kind == ObjectiveKind.SU and spec.p >= 1.0


def opt_convex_candidates(spec: ObjectiveSpec, x: Profile) -> OptResult:
    if not _supports_candidates(spec):
        raise SpecNotSupported(f"No finite candidate set for {spec.name}")
    profiles = x.as_array()[None, :]
    ys = _candidate_locations(spec, profiles)[0]
    values = eval_at_points(spec, x, ys)
    if spec.kind == ObjectiveKind.SC and spec.p > 1.0:
        piece_ys, piece_values = refine_pieces(spec, profiles)
        ys = np.concatenate([ys, piece_ys[0]])
        values = np.concatenate([values, piece_values[0]])
    return _pick(spec, ys, values, Method.CANDIDATE_SET)


def opt_grid(spec: ObjectiveSpec, x: Profile, grid_step: float = DEFAULT_GRID_STEP) -> OptResult:
    if not 0.0 < grid_step <= 0.5:
        raise OutOfRange(f"grid_step must lie in (0, 0.5], got {grid_step}")
    xs = x.as_array()
    count = int(round(1.0 / grid_step))
    grid = np.linspace(0.0, 1.0, count + 1)
    points = np.unique(np.concatenate([grid, xs, _midpoints(xs[None, :])[0]]))
    values = eval_at_points(spec, x, points)
    piece_ys, piece_values = refine_pieces(spec, xs[None, :])
    ys = np.concatenate([points, piece_ys[0]])
    values = np.concatenate([values, piece_values[0]])
    return _pick(spec, ys, values, Method.GRID_REFINED)


def optimum(spec: ObjectiveSpec, x: Profile) -> OptResult:
    """Strongest available method per objective."""
    if spec.kind == ObjectiveKind.SU_MIN:
        return opt_su_min(x)
    if _supports_candidates(spec):
        return opt_convex_candidates(spec, x)
    return opt_grid(spec, x, DEFAULT_GRID_STEP)


def opt_batch(spec: ObjectiveSpec, profiles: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """OPT values and locations for every row of a (m, n) matrix of sorted profiles."""
    profiles = np.asarray(profiles, dtype=float)
    if spec.kind in (ObjectiveKind.SU_MIN, ObjectiveKind.SC_MAX):
        ys, nearest = _gap_candidates(profiles)
        if spec.kind == ObjectiveKind.SU_MIN:
            return _pick_rows(spec, ys, nearest)
        return _pick_rows(spec, ys, 1.0 - nearest)
    if _supports_candidates(spec):
        ys = _candidate_locations(spec, profiles)
        values = aggregate(spec, np.abs(profiles[:, None, :] - ys[:, :, None]))
        if spec.kind == ObjectiveKind.SC and spec.p > 1.0:
            piece_ys, piece_values = refine_pieces(spec, profiles)
            ys = np.concatenate([ys, piece_ys], axis=1)
            values = np.concatenate([values, piece_values], axis=1)
        return _pick_rows(spec, ys, values)
    piece_ys, piece_values = refine_pieces(spec, profiles)
    return _pick_rows(spec, piece_ys, piece_values)
