"""Exhaustive deviation search on grid profiles.

Profiles are anonymous: the table holds every sorted grid profile once, in
lexicographic order, and an agent is identified by its position in the
sorted profile. A deviated report is re-sorted and looked up by rank, so the
first witness found is the lexicographically smallest (profile, coalition,
misreport) triple.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from math import comb
from typing import Optional, Tuple

import numpy as np

from core.config import TOLERANCES, default_node_budget
from core.errors import BudgetExceeded, OutOfRange
from core.model import Profile, agent_utility, make_profile
from mechanisms.registry import MechanismSpec, batch_outputs, run_mechanism

_logger = logging.getLogger(__name__)

MAX_GRID_DIVISIONS = 200


@dataclass(frozen=True)
class DeviationWitness:
    profile: Profile
    agents: Tuple[int, ...]
    misreports: Tuple[float, ...]
    gains: Tuple[float, ...]

    def deviated_profile(self) -> Profile:
        values = list(self.profile.locations)
        for agent, report in zip(self.agents, self.misreports):
            values[agent] = report
        return make_profile(values)

    def as_dict(self) -> dict:
        return {
            "profile": list(self.profile.locations),
            "agents": list(self.agents),
            "misreports": list(self.misreports),
            "gains": list(self.gains),
        }


def grid_divisions(grid_step: float) -> int:
    k = int(round(1.0 / grid_step))
    if k < 1 or k > MAX_GRID_DIVISIONS or abs(k * grid_step - 1.0) > 1e-9:
        raise OutOfRange(f"grid_step must be 1/k with k <= {MAX_GRID_DIVISIONS}, got {grid_step}")
    return k


class ProfileTable:
    """Sorted grid profiles with each agent-location's expected distance to the output."""

    def __init__(self, mech: MechanismSpec, n: int, k: int) -> None:
        self.n = n
        self.k = k
        self.grid = np.arange(k + 1) / k
        self.rows = np.asarray(
            list(itertools.combinations_with_replacement(range(k + 1), n)), dtype=np.int64
        ).reshape(-1, n)
        self.powers = (k + 1) ** np.arange(n - 1, -1, -1, dtype=np.int64)
        self.codes = self.rows @ self.powers
        self.utility = self._utility_table(mech)

    def _utility_table(self, mech: MechanismSpec) -> np.ndarray:
        locations = self.grid[self.rows]
        outputs = batch_outputs(mech, locations)
        if outputs is not None:
            support, weights = outputs
            distances = np.abs(self.grid[None, None, :] - support[:, :, None])
            return np.einsum("mk,mkg->mg", weights, distances)
        table = np.empty((len(self.rows), self.k + 1))
        for r, row in enumerate(locations):
            dist = run_mechanism(mech, Profile(tuple(float(v) for v in row)))
            table[r] = dist.expected_distance(self.grid)
        return table

    def __len__(self) -> int:
        return len(self.rows)

    def lookup(self, reports: np.ndarray) -> np.ndarray:
        """Row index of every (unsorted) report vector."""
        codes = np.sort(reports, axis=-1) @ self.powers
        return np.searchsorted(self.codes, codes)

    def profile(self, row: int) -> Profile:
        return Profile(tuple(float(self.grid[g]) for g in self.rows[row]))


def _check_nodes(nodes: int, budget: Optional[int]) -> None:
    budget = default_node_budget() if budget is None else budget
    if nodes > budget:
        raise BudgetExceeded(nodes, budget)


def _first_violation(
    table: ProfileTable, coalition: Tuple[int, ...], reports: Tuple[int, ...]
) -> Optional[Tuple[int, np.ndarray]]:
    deviated = table.rows.copy()
    deviated[:, coalition] = reports
    target = table.lookup(deviated)
    truth = table.rows[:, coalition]
    rows = np.arange(len(table))[:, None]
    gains = table.utility[target[:, None], truth] - table.utility[rows, truth]
    hits = np.flatnonzero((gains > TOLERANCES.strict_gain).all(axis=1))
    if hits.size == 0:
        return None
    first = int(hits[0])
    return first, gains[first]


def _search(
    mech: MechanismSpec,
    n: int,
    grid_step: float,
    max_coalition: int,
    node_budget: Optional[int],
) -> Optional[DeviationWitness]:
    k = grid_divisions(grid_step)
    if n < 1:
        raise OutOfRange(f"n must be >= 1, got {n}")
    if not 1 <= max_coalition <= n:
        raise OutOfRange(f"max_coalition must lie in [1, {n}], got {max_coalition}")
    profiles = comb(n + k, n)
    nodes = profiles * sum(comb(n, s) * (k + 1) ** s for s in range(1, max_coalition + 1))
    _check_nodes(nodes, node_budget)
    _logger.info(
        "Checking %s: n=%d, step=1/%d, coalitions<=%d, %d profiles, %d nodes",
        mech.name, n, k, max_coalition, profiles, nodes,
    )
    table = ProfileTable(mech, n, k)
    best: Optional[Tuple[int, Tuple[int, ...], Tuple[int, ...], np.ndarray]] = None
    for size in range(1, max_coalition + 1):
        for coalition in itertools.combinations(range(n), size):
            for reports in itertools.product(range(k + 1), repeat=size):
                found = _first_violation(table, coalition, reports)
                if found is None:
                    continue
                row, gains = found
                key = (row, coalition, reports)
                if best is None or key < best[:3]:
                    best = (row, coalition, reports, gains)
    if best is None:
        _logger.info("No grid witness for %s", mech.name)
        return None
    row, coalition, reports, gains = best
    witness = DeviationWitness(
        profile=table.profile(row),
        agents=coalition,
        misreports=tuple(float(table.grid[g]) for g in reports),
        gains=tuple(float(g) for g in gains),
    )
    _logger.info("Witness for %s: %s", mech.name, witness.as_dict())
    return witness


def check_sp(
    mech: MechanismSpec, n: int, grid_step: float, node_budget: Optional[int] = None
) -> Optional[DeviationWitness]:
    return _search(mech, n, grid_step, 1, node_budget)


def check_gsp(
    mech: MechanismSpec,
    n: int,
    grid_step: float,
    max_coalition: int,
    node_budget: Optional[int] = None,
) -> Optional[DeviationWitness]:
    """Joint grid misreports by coalitions of up to ``max_coalition`` agents.

    A witness needs every coalition member to gain strictly.
    """
    return _search(mech, n, grid_step, max_coalition, node_budget)


def replay(mech: MechanismSpec, witness: DeviationWitness) -> Tuple[float, ...]:
    """Recompute the gains of a witness directly through the mechanism."""
    truthful = run_mechanism(mech, witness.profile)
    deviated = run_mechanism(mech, witness.deviated_profile())
    return tuple(
        agent_utility(witness.profile.locations[i], deviated)
        - agent_utility(witness.profile.locations[i], truthful)
        for i in witness.agents
    )
