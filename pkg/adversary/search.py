"""Worst-case approximation ratio search.

Phase one enumerates grid profiles exhaustively for n <= 3; phase two draws
random profiles and then climbs coordinate-wise from the best seeds with a
halving step. Every reported ratio is recomputed from its witness through
``ratio_at``.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from math import comb
from typing import List, Optional, Sequence, Tuple

import numpy as np

from adversary.bounds import claimed_bound
from core.config import TOLERANCES, SearchConfig
from core.errors import BudgetExceeded, ConfigError
from core.model import FacilityDistribution, ObjectiveSpec, Profile, make_profile
from mechanisms.registry import MechanismKind, MechanismSpec, batch_outputs, run_mechanism
from objectives.evaluate import (
    Convention,
    default_convention,
    eval_batch,
    eval_objective,
    eval_uniform_batch,
)
from optima.solver import opt_batch, optimum

_logger = logging.getLogger(__name__)

CHUNK_ROWS = 100_000
MAX_CLIMB_STEPS = 20_000


def ratio_of(spec: ObjectiveSpec, alg: float, opt: float) -> float:
    """OPT/ALG for utilities, ALG/OPT for costs; a zero denominator gives inf (0/0 gives 1)."""
    num, den = (opt, alg) if spec.is_utility else (alg, opt)
    if den <= 0.0:
        return math.inf if num > 0.0 else 1.0
    return num / den


def _ratio_array(spec: ObjectiveSpec, alg: np.ndarray, opt: np.ndarray) -> np.ndarray:
    num, den = (opt, alg) if spec.is_utility else (alg, opt)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = num / den
    return np.where(den > 0.0, ratio, np.where(num > 0.0, np.inf, 1.0))


def ratio_at(
    mech: MechanismSpec,
    spec: ObjectiveSpec,
    x: Profile,
    convention: Optional[Convention] = None,
) -> float:
    alg = eval_objective(spec, x, run_mechanism(mech, x), convention).value
    return ratio_of(spec, alg, optimum(spec, x).value)


def batch_alg(
    mech: MechanismSpec,
    spec: ObjectiveSpec,
    profiles: np.ndarray,
    convention: Optional[Convention] = None,
) -> np.ndarray:
    outputs = batch_outputs(mech, profiles)
    if outputs is not None:
        return eval_batch(spec, profiles, *outputs, convention)
    if mech.kind == MechanismKind.UNIFORM:
        closed = eval_uniform_batch(spec, profiles, convention)
        if closed is not None:
            return closed
    values = []
    for row in profiles:
        x = Profile(tuple(float(v) for v in row))
        values.append(eval_objective(spec, x, run_mechanism(mech, x), convention).value)
    return np.asarray(values)


def batch_ratios(
    mech: MechanismSpec,
    spec: ObjectiveSpec,
    profiles: np.ndarray,
    convention: Optional[Convention] = None,
) -> np.ndarray:
    profiles = np.sort(np.asarray(profiles, dtype=float), axis=1)
    ratios = np.empty(profiles.shape[0])
    for start in range(0, profiles.shape[0], CHUNK_ROWS):
        chunk = profiles[start : start + CHUNK_ROWS]
        opt, _ = opt_batch(spec, chunk)
        ratios[start : start + CHUNK_ROWS] = _ratio_array(
            spec, batch_alg(mech, spec, chunk, convention), opt
        )
    return ratios


@dataclass(frozen=True)
class RatioReport:
    mechanism: MechanismSpec
    objective: ObjectiveSpec
    worst_ratio: float
    witness: Profile
    claimed_bound: Optional[float]
    search_config: SearchConfig
    convention: Convention
    conjecture: bool = False
    evaluated: int = 0

    @property
    def slack(self) -> Optional[float]:
        if self.claimed_bound is None:
            return None
        if math.isinf(self.claimed_bound) and math.isinf(self.worst_ratio):
            return 0.0
        return self.claimed_bound - self.worst_ratio

    @property
    def falsified(self) -> bool:
        return (
            self.claimed_bound is not None
            and self.worst_ratio > self.claimed_bound + TOLERANCES.ratio_reproduction
        )

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.worst_ratio)

    def as_dict(self) -> dict:
        return {
            "mechanism": self.mechanism.name,
            "objective": self.objective.name,
            "p": self.objective.p_label,
            "worst_ratio": self.worst_ratio,
            "witness": list(self.witness.locations),
            "claimed_bound": self.claimed_bound,
            "slack": self.slack,
            "falsified": self.falsified,
            "unbounded": self.unbounded,
            "conjecture": self.conjecture,
            "convention": self.convention.value,
            "evaluated": self.evaluated,
            "search_config": self.search_config.as_dict(),
        }


@dataclass
class _Best:
    ratio: float = -math.inf
    profile: Optional[np.ndarray] = None

    def offer(self, profiles: np.ndarray, ratios: np.ndarray) -> None:
        if ratios.size == 0:
            return
        # argmax keeps the first maximum, so generation order breaks ties.
        i = int(np.argmax(ratios))
        if ratios[i] > self.ratio:
            self.ratio = float(ratios[i])
            self.profile = profiles[i].copy()


def grid_profiles(n: int, k: int) -> np.ndarray:
    """All sorted profiles on {0, 1/k, ..., 1}^n in lexicographic order."""
    if n == 2:
        i, j = np.triu_indices(k + 1)
        idx = np.stack([i, j], axis=1)
    else:
        idx = np.asarray(
            list(itertools.combinations_with_replacement(range(k + 1), n)), dtype=np.int64
        ).reshape(-1, n)
    return idx / k


def _exhaustive_step(n: int, config: SearchConfig) -> float:
    return config.grid_step if n <= 2 else max(config.grid_step, config.exhaustive_n3_step)


def _phase_one_sizes(config: SearchConfig) -> List[int]:
    low, high = config.n_range
    return [n for n in range(low, high + 1) if n <= 3]


def _planned_nodes(config: SearchConfig) -> int:
    nodes = 0
    for n in _phase_one_sizes(config):
        k = int(round(1.0 / _exhaustive_step(n, config)))
        nodes += comb(n + k, n)
    low, high = config.n_range
    return nodes + config.restarts * (high - low + 1)


def _climb(
    mech: MechanismSpec,
    spec: ObjectiveSpec,
    start: np.ndarray,
    ratio: float,
    config: SearchConfig,
    convention: Convention,
) -> Tuple[np.ndarray, float, int]:
    """Coordinate-wise ascent: try +-step on every coordinate, halve the step on failure."""
    x = start.copy()
    n = x.size
    step = config.grid_step
    evaluated = 0
    moves = np.concatenate([np.eye(n), -np.eye(n)])
    for _ in range(MAX_CLIMB_STEPS):
        if step < config.min_step or math.isinf(ratio):
            break
        trial = np.clip(x[None, :] + step * moves, 0.0, 1.0)
        ratios = batch_ratios(mech, spec, trial, convention)
        evaluated += len(trial)
        i = int(np.argmax(ratios))
        if ratios[i] > ratio:
            x, ratio = np.sort(trial[i]), float(ratios[i])
        else:
            step /= 2
    return x, ratio, evaluated


def search_worst_ratio(
    mech: MechanismSpec,
    spec: ObjectiveSpec,
    config: SearchConfig,
    convention: Optional[Convention] = None,
) -> RatioReport:
    convention = convention or default_convention(spec)
    nodes = _planned_nodes(config)
    if nodes > config.node_budget:
        raise BudgetExceeded(nodes, config.node_budget)
    _logger.info("Searching %s under %s with %s", mech.name, spec.name, config.as_dict())
    rng = np.random.default_rng(config.seed)
    best = _Best()
    evaluated = 0
    low, high = config.n_range
    for n in range(low, high + 1):
        local = _Best()
        seeds: List[Tuple[float, np.ndarray]] = []
        if n <= 3:
            k = int(round(1.0 / _exhaustive_step(n, config)))
            profiles = grid_profiles(n, k)
            ratios = batch_ratios(mech, spec, profiles, convention)
            evaluated += len(profiles)
            local.offer(profiles, ratios)
            _logger.info("n=%d exhaustive 1/%d: %d profiles, best %.12g", n, k, len(profiles), local.ratio)
            if local.profile is not None:
                seeds.append((local.ratio, local.profile))
        if config.restarts:
            profiles = np.sort(rng.random((config.restarts, n)), axis=1)
            ratios = batch_ratios(mech, spec, profiles, convention)
            evaluated += len(profiles)
            local.offer(profiles, ratios)
            order = np.argsort(-ratios, kind="stable")[: config.local_seeds]
            seeds.extend((float(ratios[i]), profiles[i]) for i in order)
        for ratio, start in seeds[: config.local_seeds + 1]:
            climbed, climbed_ratio, steps = _climb(mech, spec, start, ratio, config, convention)
            evaluated += steps
            local.offer(climbed[None, :], np.asarray([climbed_ratio]))
        _logger.info("n=%d best ratio %.12g at %s", n, local.ratio, local.profile)
        if local.profile is not None:
            best.offer(local.profile[None, :], np.asarray([local.ratio]))
    if best.profile is None:
        raise ConfigError("Nothing to search: sizes above 3 need restarts > 0")
    witness = make_profile(best.profile)
    worst = ratio_at(mech, spec, witness, convention)
    if not math.isinf(worst) and abs(worst - best.ratio) > TOLERANCES.ratio_reproduction:
        _logger.warning("Witness re-evaluates to %.12g, search saw %.12g", worst, best.ratio)
    claim = claimed_bound(mech, spec)
    report = RatioReport(
        mechanism=mech,
        objective=spec,
        worst_ratio=worst,
        witness=witness,
        claimed_bound=claim.value,
        search_config=config,
        convention=convention,
        conjecture=claim.conjecture,
        evaluated=evaluated,
    )
    if report.falsified:
        _logger.warning("FALSIFICATION: %s under %s reaches %.12g > %.12g",
                        mech.name, spec.name, worst, claim.value)
    return report


def objective_for(family: str, p: float) -> ObjectiveSpec:
    if math.isinf(p):
        return ObjectiveSpec.su_max() if family == "su" else ObjectiveSpec.sc_max()
    return ObjectiveSpec.su(p) if family == "su" else ObjectiveSpec.sc(p)


def bound_curve(
    mech: MechanismSpec,
    family: str,
    p_values: Sequence[float],
    config: SearchConfig,
) -> List[RatioReport]:
    """One ratio search per exponent; a power-weighted mechanism is re-instantiated at each p."""
    reports = []
    for p in p_values:
        spec = objective_for(family, float(p))
        current = mech
        if mech.kind == MechanismKind.POWER_WEIGHTED:
            current = MechanismSpec.power_weighted(float(p))
        reports.append(search_worst_ratio(current, spec, config))
    return reports


@dataclass(frozen=True)
class FamilyPoint:
    n: int
    ratio: float
    alg: float
    alg_closed_form: float
    opt: float


@dataclass(frozen=True)
class FamilyReport:
    points: Tuple[FamilyPoint, ...]
    exponent: float


def min_utility_family_profile(n: int) -> Profile:
    """x_1 = 1/sqrt(n), the rest spaced (1 - x_1)/n apart, leaving the last gap before 1."""
    first = 1.0 / math.sqrt(n)
    gap = (1.0 - first) / n
    return make_profile(first + gap * i for i in range(n))


def uniform_min_utility_family(ns: Sequence[int] = (4, 16, 64, 256)) -> FamilyReport:
    spec = ObjectiveSpec.su_min()
    uniform = FacilityDistribution.uniform_unit()
    points = []
    for n in ns:
        x = min_utility_family_profile(n)
        alg = eval_objective(spec, x, uniform).value
        closed = 1 / (2 * n) + (n + 1) / (4 * n**2) * (1 - 1 / math.sqrt(n)) ** 2
        opt = optimum(spec, x).value
        points.append(FamilyPoint(n=n, ratio=ratio_of(spec, alg, opt), alg=alg, alg_closed_form=closed, opt=opt))
    slope, _ = np.polyfit(np.log([pt.n for pt in points]), np.log([pt.ratio for pt in points]), 1)
    return FamilyReport(points=tuple(points), exponent=float(slope))

